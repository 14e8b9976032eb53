import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off keeps the kernels' float arithmetic free of fused
# multiply-adds so results do not depend on compiler contraction choices.
ext_modules = cythonize(
    [
        Extension(
            "ratchet._kernels",
            ["src/ratchet/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3", "-ffp-contract=off"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
    ],
    language_level=3,
)

setup(ext_modules=ext_modules)
