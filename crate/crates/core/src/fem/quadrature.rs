//! Symmetric 12-point triangle rule, exact for polynomials of degree ≤ 6.

/// A quadrature node in barycentric coordinates. Weights sum to one and are
/// multiplied by the element area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

const fn qp(a: f64, b: f64, c: f64, weight: f64) -> QuadPoint {
    QuadPoint { bary: [a, b, c], weight }
}

const W1: f64 = 0.050844906370207;
const A1: f64 = 0.873821971016996;
const B1: f64 = 0.063089014491502;
const W2: f64 = 0.116786275726379;
const A2: f64 = 0.501426509658179;
const B2: f64 = 0.249286745170910;
const W3: f64 = 0.082851075618374;
const A3: f64 = 0.636502499121399;
const B3: f64 = 0.310352451033785;
const C3: f64 = 0.053145049844816;

static RULE: [QuadPoint; 12] = [
    qp(A1, B1, B1, W1),
    qp(B1, A1, B1, W1),
    qp(B1, B1, A1, W1),
    qp(A2, B2, B2, W2),
    qp(B2, A2, B2, W2),
    qp(B2, B2, A2, W2),
    qp(A3, B3, C3, W3),
    qp(A3, C3, B3, W3),
    qp(B3, A3, C3, W3),
    qp(B3, C3, A3, W3),
    qp(C3, A3, B3, W3),
    qp(C3, B3, A3, W3),
];

pub fn triangle_rule() -> &'static [QuadPoint] {
    &RULE
}
