"""Build glue: compile the popbranch-py cdylib with cargo and ship it as the
`popbranch_py` extension module. The module targets the stable CPython ABI
(3.10+), so one build serves every supported interpreter."""

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

REPO = Path(__file__).resolve().parent.parent
DYLIB_NAMES = ("libpopbranch_py.so", "libpopbranch_py.dylib", "popbranch_py.dll")


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "popbranch-py"],
            cwd=REPO,
            check=True,
        )
        out_dir = REPO / "target" / "release"
        for name in DYLIB_NAMES:
            built = out_dir / name
            if built.exists():
                break
        else:
            raise FileNotFoundError(f"no cdylib named {DYLIB_NAMES} in {out_dir}")
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, dest)


setup(
    ext_modules=[Extension("popbranch_py", sources=[])],
    cmdclass={"build_ext": CargoBuildExt},
)
