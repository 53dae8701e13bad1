use crate::geometry::Point2;
use serde::{Deserialize, Serialize};

/// One-dimensional building block with closed-form first and second derivatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    /// `sum c_k t^k`
    Poly {
        coefficients: Vec<f64>,
    },
    /// `sin(freq t + phase)`
    Sin {
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `cos(freq t + phase)`
    Cos {
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
    Product {
        factors: Vec<Factor>,
    },
}

impl Factor {
    pub fn constant(c: f64) -> Self {
        Factor::Poly { coefficients: vec![c] }
    }

    pub fn poly(coefficients: &[f64]) -> Self {
        Factor::Poly { coefficients: coefficients.to_vec() }
    }

    pub fn sin(freq: f64) -> Self {
        Factor::Sin { freq, phase: 0.0 }
    }

    pub fn cos(freq: f64) -> Self {
        Factor::Cos { freq, phase: 0.0 }
    }

    /// `(f, f', f'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Factor::Poly { coefficients } => crate::geometry::poly(coefficients, t),
            Factor::Sin { freq, phase } => {
                let (s, c) = (freq * t + phase).sin_cos();
                (s, freq * c, -freq * freq * s)
            }
            Factor::Cos { freq, phase } => {
                let (s, c) = (freq * t + phase).sin_cos();
                (c, -freq * s, -freq * freq * c)
            }
            Factor::Product { factors } => factors.iter().fold((1.0, 0.0, 0.0), |(f, d, dd), g| {
                let (g0, g1, g2) = g.eval(t);
                (f * g0, d * g0 + f * g1, dd * g0 + 2.0 * d * g1 + f * g2)
            }),
        }
    }
}

/// `coef * fx(x) * gy(y)`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub fx: Factor,
    pub gy: Factor,
}

/// Pointwise derivatives up to second order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uyy: f64,
    pub uxy: f64,
}

impl Jet {
    pub fn grad(&self) -> Point2 {
        Point2::new(self.ux, self.uy)
    }
}

/// Sum of separable terms with hand-coded derivatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedFunction {
    pub terms: Vec<Term>,
}

impl ManufacturedFunction {
    pub fn new(terms: Vec<Term>) -> Self {
        ManufacturedFunction { terms }
    }

    pub fn separable(coef: f64, fx: Factor, gy: Factor) -> Self {
        ManufacturedFunction { terms: vec![Term { coef, fx, gy }] }
    }

    /// `cos(pi x / 2) cos(pi y / 2)`
    pub fn cos_cos_quarter_wave() -> Self {
        let w = std::f64::consts::FRAC_PI_2;
        Self::separable(1.0, Factor::cos(w), Factor::cos(w))
    }

    /// `1 - x^2 - y^2`
    pub fn paraboloid() -> Self {
        ManufacturedFunction::new(vec![
            Term { coef: 1.0, fx: Factor::constant(1.0), gy: Factor::constant(1.0) },
            Term { coef: -1.0, fx: Factor::poly(&[0.0, 0.0, 1.0]), gy: Factor::constant(1.0) },
            Term { coef: -1.0, fx: Factor::constant(1.0), gy: Factor::poly(&[0.0, 0.0, 1.0]) },
        ])
    }

    pub fn jet(&self, p: Point2) -> Jet {
        let mut j = Jet::default();
        for t in &self.terms {
            let (f0, f1, f2) = t.fx.eval(p.x);
            let (g0, g1, g2) = t.gy.eval(p.y);
            let c = t.coef;
            j.u += c * f0 * g0;
            j.ux += c * f1 * g0;
            j.uy += c * f0 * g1;
            j.uxx += c * f2 * g0;
            j.uyy += c * f0 * g2;
            j.uxy += c * f1 * g1;
        }
        j
    }

    pub fn value(&self, p: Point2) -> f64 {
        self.jet(p).u
    }

    pub fn gradient(&self, p: Point2) -> Point2 {
        self.jet(p).grad()
    }
}
