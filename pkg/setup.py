import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional: uamsim falls back to the pure-Python
# implementations in uamsim._kernels.fallback when the extension is absent.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    extensions = [
        Extension(
            "uamsim._kernels._core",
            ["src/uamsim/_kernels/_core.pyx"],
            include_dirs=[np.get_include()],
            # No -ffast-math: the kernels rely on IEEE inf propagation and
            # must stay bit-identical to the pure-Python fallback.
            extra_compile_args=["-O3"],
        )
    ]
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
