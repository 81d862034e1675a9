import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernel is optional: if the build fails (no compiler, no
# Cython) the package falls back to the numpy implementation at import.
extensions = [
    Extension(
        "edgesim.kernels._hinge",
        ["src/edgesim/kernels/_hinge.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"})
    if cythonize
    else [],
)
