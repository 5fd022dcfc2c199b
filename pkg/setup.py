from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "degenlag.symbolic._evalcore",
        ["src/degenlag/symbolic/_evalcore.pyx"],
    ),
]

setup(
    ext_modules=cythonize(extensions, language_level="3"),
)
