from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "pfmass._core",
    sources=["src/pfmass/_core.pyx"],
)

setup(ext_modules=cythonize([ext], language_level=3))
