"""Build script: compiles the optional profile-sweep kernel.

The package is fully functional without the extension; matroidcg.backend
falls back to the pure-Python evaluator when the import fails.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "matroidcg._speed",
                ["src/matroidcg/_speed.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
