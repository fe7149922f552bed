import numpy
from Cython.Build import cythonize
from setuptools import setup

setup(
    ext_modules=cythonize("src/ofclimb/_kernels.pyx", language_level=3),
    include_dirs=[numpy.get_include()],
)
