try:
    from ._msde import *  # noqa: F401,F403  (installed package layout)
except ImportError:  # in-tree build: the extension sits directly on PYTHONPATH
    from _msde import *  # noqa: F401,F403
