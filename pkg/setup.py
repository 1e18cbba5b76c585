from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
    import numpy as np
except ImportError:  # pure-Python install; kernels fall back to NumPy
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "phigeom._ckernels",
                ["src/phigeom/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
