"""``python -m weilkit``: caps BLAS/FFT threads from WEILKIT_THREADS before numpy loads."""
import os
import sys

_threads = os.environ.get("WEILKIT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from weilkit.cli import main  # noqa: E402

sys.exit(main())
