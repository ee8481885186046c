from setuptools import setup

try:
    from Cython.Build import cythonize
except ImportError:  # compiled kernels are optional; the package falls back to pure Python
    ext_modules = []
else:
    ext_modules = cythonize(
        "src/repolearn/_ckernels.pyx",
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
