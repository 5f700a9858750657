from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "approachlab._kernels._fast",
    ["src/approachlab/_kernels/_fast.pyx"],
)

setup(ext_modules=cythonize([ext], language_level=3))
