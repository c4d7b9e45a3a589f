import os

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("NPY_NUM_BUILD_JOBS").install()

CORE_SOURCES = [
    "src/rat.cpp",
    "src/numerics.cpp",
    "src/paramspace.cpp",
    "src/constraints.cpp",
    "src/optim.cpp",
    "src/empirics.cpp",
    "src/serialize.cpp",
    "src/config.cpp",
    "src/table_golden.cpp",
]

EIGEN_INCLUDE = os.environ.get("EIGEN_INCLUDE_DIR", "/usr/include/eigen3")

ext = Pybind11Extension(
    "widthlab._core",
    sources=CORE_SOURCES + ["src/bindings.cpp"],
    include_dirs=["include", "vendor", EIGEN_INCLUDE],
    cxx_std=20,
)

setup(
    packages=["widthlab"],
    package_dir={"": "python"},
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
    zip_safe=False,
)
