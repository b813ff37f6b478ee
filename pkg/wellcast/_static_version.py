# -*- coding: utf-8 -*-
# This file is overwritten by setup.py when a source or binary
# distribution is made.  The magic value "__use_git__" makes
# _version.py ask git for the version instead.

version = "__use_git__"
