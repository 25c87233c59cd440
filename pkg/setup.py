import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext_module = Extension(
    "superosc._ckernels",
    ["src/superosc/_ckernels.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3", "-fno-fast-math"],
)

setup(ext_modules=cythonize(ext_module, language_level=3))
