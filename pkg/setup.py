"""Build script for the optional compiled kernels.

The package is fully functional without the extension; `renewal_ldp._core`
falls back to a numpy implementation when the compiled module is missing.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "renewal_ldp._core._native",
                ["src/renewal_ldp/_core/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
