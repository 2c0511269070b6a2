"""Numerical tolerances shared by the library and its tests."""

# symmetric eigensolver
SYMMETRY_RTOL = 1e-12
JACOBI_OFFDIAG_RTOL = 1e-14
JACOBI_MAX_SWEEPS = 100
EIG_RECONSTRUCTION_RTOL = 1e-10
ORTHONORMALITY_TOL = 1e-10

# polynomial roots
ABERTH_MAX_ITER = 200
ABERTH_STEP_RTOL = 1e-15
ROOT_RESIDUAL_RTOL = 1e-8

# signal admissibility: |entry| > ADMISSIBLE_RTOL * max(1, |signal|_inf)
ADMISSIBLE_RTOL = 1e-12
SIMPLE_ROOT_TOL = 1e-8
# a computed double root splits by ~sqrt(eps); flag it through p'(r) instead
MULTIPLE_ROOT_DERIV_RTOL = 1e-6
GENERATION_MAX_DRAWS = 1000

# spectral quantities on normalized pairs
DEGENERATE_LAMBDA2 = 1e-10
PSD_TOL = 1e-10

# solver
SOLVER_MAX_ITER = 20000
SOLVER_TOL = 1e-9
SOLVER_STAGNATION_WINDOW = 50
SOLVER_STEP_SAFETY = 0.95
SOLVER_POLISH_EVERY = 100
POLISH_GN_STEPS = 20
OPNORM_ITERATIONS = 100
