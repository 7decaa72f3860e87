"""Numerical workbench for biparameter Hilbert-transform commutators.

Modules:
    grid        periodic grid signals, dyadic lattice, cell-mask open sets,
                maximal functions
    transforms  Hilbert transforms, half-line/quadrant projections, Cayley
                transport between half-plane and disk boundary models
    wavelets    band-limited orthonormal wavelet system and its commutator
                kernels
    bmo         product and rectangular BMO functionals on wavelet
                coefficients
    commutator  the nested commutator as an operator, norms, Hankel form,
                dual norm estimation
    journe      dyadic rectangle combinatorics: maximal rectangles,
                embeddedness, covering sums, thinning
    cli         configuration-driven experiment runner
"""

__version__ = "0.1.0"
