# -*- coding: utf-8 -*-
#
# Copyright 2024 the wellcast developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
"""Package version, from a static file or from 'git describe'.

The version is embedded in serialized models so that a model file can be
traced back to the code that produced it.
"""
import os
import subprocess

from setuptools.command.build_py import build_py as build_py_orig
from setuptools.command.sdist import sdist as sdist_orig

# No public API
__all__ = []

package_root = os.path.dirname(os.path.realpath(__file__))
package_name = os.path.basename(package_root)
distr_root = os.path.dirname(package_root)

STATIC_VERSION_FILE = '_static_version.py'
UNKNOWN = '0+unknown'


def _static_version():
    values = {}
    with open(os.path.join(package_root, STATIC_VERSION_FILE), 'rb') as f:
        exec(f.read(), {}, values)  # pylint: disable=exec-used
    return values['version']


def _git(*args):
    try:
        out = subprocess.run(['git', *args], cwd=distr_root,
                             stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                             check=True)
    except (OSError, subprocess.CalledProcessError):
        return None
    return out.stdout.decode().strip()


def version_from_git():
    """Return a PEP 440 version derived from the latest 'v' tag.

    Returns None when not inside *this* git checkout, or when
    there are no tags.
    """
    toplevel = _git('rev-parse', '--show-toplevel')
    if not toplevel or not os.path.samefile(toplevel, distr_root):
        return None
    description = _git('describe', '--long', '--tags', '--match', 'v*')
    if not description:
        return None
    release, distance, commit = description.lstrip('v').rsplit('-', 2)
    version = release
    if distance != '0':
        version += f'.dev{distance}+{commit}'
    if _git('status', '--porcelain', '--untracked-files=no'):
        version += ('.dirty' if '+' in version else '+dirty')
    return version


def get_version():
    """Return the version of the package."""
    version = _static_version()
    if version != '__use_git__':
        return version
    return version_from_git() or UNKNOWN


__version__ = get_version()


# setup.py hooks that freeze the version into distributions

def _write_version(fname):
    # might be a hard link, so remove before writing
    try:
        os.remove(fname)
    except OSError:
        pass
    with open(fname, 'w') as f:
        f.write("# This file has been created by setup.py.\n"
                f"version = '{__version__}'\n")


class _build_py(build_py_orig):
    def run(self):
        super().run()
        _write_version(os.path.join(self.build_lib, package_name,
                                    STATIC_VERSION_FILE))


class _sdist(sdist_orig):
    def make_release_tree(self, base_dir, files):
        super().make_release_tree(base_dir, files)
        _write_version(os.path.join(base_dir, package_name,
                                    STATIC_VERSION_FILE))


cmdclass = dict(sdist=_sdist, build_py=_build_py)
