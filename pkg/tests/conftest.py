import os

# Single-threaded BLAS keeps timings stable and runs reproducible; must be
# set before numpy loads.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
