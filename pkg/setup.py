from setuptools import Extension, setup
from Cython.Build import cythonize

ext_modules = cythonize(
    [Extension("expfdr._kernels", ["src/expfdr/_kernels.pyx"])],
    language_level=3,
)

setup(ext_modules=ext_modules)
