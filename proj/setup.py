"""CMake-driven build of the pybind11 extension, packaged with setuptools."""

import os
import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        cmake_args = [
            f"-DCMAKE_BUILD_TYPE={os.environ.get('NLHCONV_BUILD_TYPE', 'Release')}",
            f"-DPython3_EXECUTABLE={sys.executable}",
            "-DNLHCONV_BUILD_TESTING=OFF",
            "-DNLHCONV_BUILD_CLI=OFF",
            "-DNLHCONV_BUILD_PYTHON=ON",
        ]
        try:
            import pybind11

            cmake_args.append(f"-Dpybind11_DIR={pybind11.get_cmake_dir()}")
        except ImportError:
            pass  # rely on a system-wide pybind11 CMake package

        subprocess.run(["cmake", "-S", str(source_dir), "-B", str(build_dir)] + cmake_args,
                       check=True)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core", "-j"],
            check=True,
        )

        built = list((build_dir / "python" / "nlhconv").glob("_core*"))
        if not built:
            raise RuntimeError("CMake did not produce the _core extension module")
        destination = Path(self.get_ext_fullpath(ext.name)).resolve()
        destination.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[0], destination)


setup(
    packages=["nlhconv"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("nlhconv._core")],
    cmdclass={"build_ext": CMakeBuild},
)
