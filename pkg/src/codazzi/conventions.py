"""The index and sign conventions used by every curvature quantity."""

CONVENTION_ID = "codazzi-conventions/1"

SHEET = """\
Curvature conventions (codazzi-conventions/1)
=============================================

Coordinates x^1..x^n, metric g_ij, inverse g^ij, summation over repeated indices.

Christoffel symbols (Levi-Civita connection)
    Gamma^k_ij = 1/2 g^km (d_i g_jm + d_j g_im - d_m g_ij)

Covariant derivative of a (0,2) tensor and of a covector
    nabla_i b_jk  = d_i b_jk - Gamma^m_ij b_mk - Gamma^m_ik b_jm
    nabla_i beta_j = d_i beta_j - Gamma^m_ij beta_m

Riemann tensor, one index up (stored with axes [i, j, k, m])
    R_ijk^m = d_j Gamma^m_ik - d_i Gamma^m_jk + Gamma^m_je Gamma^e_ik - Gamma^m_ie Gamma^e_jk

This sign is OUR CHOICE. Only the Ricci contraction below is fixed externally;
the formula above is pinned by two requirements:
  (1) the commutator identity holds with these exact signs
          [nabla_i, nabla_j] b_kl = R_ijk^m b_ml + R_ijl^m b_km
  (2) R = +2 on the unit 2-sphere.

All indices down
    R_ijkl = R_ijk^m g_ml
    (R_ijkl = -R_jikl = -R_ijlk = R_klij; R_thph,thph = sin^2(th) on the unit sphere)

Ricci tensor and scalar curvature
    R_kl = -R_mkl^m          R = g^kl R_kl

Divergence and contracted second Bianchi identity
    nabla_m R_jkl^m = nabla_k R_jl - nabla_j R_kl

Weyl (conformal) tensor, n >= 3
    C_ijkl = R_ijkl - 1/(n-2) (g_ik R_jl - g_il R_jk - g_jk R_il + g_jl R_ik)
                    + R/((n-1)(n-2)) (g_ik g_jl - g_il g_jk)
    C_jkl^m = C_jkln g^nm     (every trace vanishes)

Weyl 1-form tensor (Schouten-like)
    S_kj = R_kj - R/(2(n-1)) g_kj

Residuals
    residual = max|sum of terms| / (1 + max over terms of max|term|)
""".format(id=CONVENTION_ID)
