from setuptools import Extension, setup

# The compiled kernels are optional: if Cython (or a C compiler) is missing
# the package falls back to the numpy implementations at import time.
try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "ferlite.kernels._cykernels",
                ["src/ferlite/kernels/_cykernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
