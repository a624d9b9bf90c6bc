"""Single configuration record for every tolerance and numerical knob.

No module keeps hidden tolerance globals: operations either take explicit
parameters or accept a :class:`Numerics` instance (defaulting to
:data:`DEFAULTS`).
"""

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Numerics:
    """Numerical tolerances and resource caps.

    Attributes
    ----------
    class_tol : float
        Default tolerance for operator-class validation (unitary,
        contraction, self-adjoint, dissipative).
    cluster_tol : float
        Eigenvalues closer than this are merged into one spectral cluster.
    normal_tol : float
        Max-norm commutator bound accepted as numerically normal.
    defect_clamp_tol : float
        Eigenvalues of I - T*T in [-defect_clamp_tol, 0) are clamped to 0;
        anything lower raises.
    eigenvalue_margin : float
        Inverse Cayley transform requires min |1 - spec(T)| above this.
    separation_min : float
        Pairwise spectral separation required by recursive symbol
        evaluation and enforced by the instance generators.
    moi_term_limit : int
        Refuse joint eigen-sums with more terms than this.
    partition_cap : int
        Highest derivative order enumerated along multiplicative paths.
    quad_nodes : int
        Gauss-Legendre node count for the integral remainder form.
    theta_delta : float
        Cutoff around the Cayley preimage of the point 1 on the circle
        when integrating along the real line.
    theta_nodes : int
        Total Gauss-Legendre nodes for the real-line quadrature.
    helton_radius : float
        Default disk radius for the planar double-integral form.
    helton_grid : int
        Angular grid size for the planar double integral.
    disk_measure_factor : complex
        Constant converting planar Lebesgue measure dx dy into the
        two-form dz^dzbar. Calibrated once on the closed-form case
        eta = 1/z, f = z (expected value 2*pi*i) and frozen here.
    contraction_margin : float
        Generated contractions are scaled to operator norm 1 - margin.
    generator_norm : float
        Generated self-adjoint path generators are scaled to this norm.
    """

    class_tol: float = 1e-12
    cluster_tol: float = 1e-8
    normal_tol: float = 1e-8
    defect_clamp_tol: float = 1e-12
    eigenvalue_margin: float = 1e-8
    separation_min: float = 1e-6
    moi_term_limit: int = 10**8
    partition_cap: int = 8
    quad_nodes: int = 64
    theta_delta: float = 1e-8
    theta_nodes: int = 4096
    helton_radius: float = 0.99
    helton_grid: int = 256
    disk_measure_factor: complex = field(default=-2j)
    contraction_margin: float = 0.05
    generator_norm: float = 2.0

    def with_(self, **kwargs):
        """Return a copy with the given fields replaced."""
        return replace(self, **kwargs)


DEFAULTS = Numerics()
