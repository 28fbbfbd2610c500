"""Kernel selection: compiled Cython core when available, pure Python otherwise.

Set NETPROTECT_PURE=1 to force the pure kernels (used by the benchmark and
the equivalence tests). ``impl`` is the active module; both expose the same
functions with identical numeric behaviour.
"""

import os

from . import pure

if os.environ.get("NETPROTECT_PURE") == "1":
    impl = pure
else:
    try:
        from . import _fast as impl  # type: ignore[no-redef]
    except ImportError:
        impl = pure

using_compiled = impl.KERNEL_NAME == "cython"

reach_weight = impl.reach_weight
reach_weight_masks = impl.reach_weight_masks
gibbs_sweeps = impl.gibbs_sweeps
