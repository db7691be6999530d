"""Build the optional compiled kernels.

The package works without them; ``d2dcache.kernels`` falls back to a numpy
implementation when the extension is missing.

    pip install -e . --no-build-isolation
    python setup.py build_ext --inplace
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "d2dcache._kernels",
                ["src/d2dcache/_kernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
