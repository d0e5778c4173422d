//! Coefficient-table expressions for problem files.
//!
//! A field is a sum of terms `coeff · Π_j x_j^powers[j] · Π factors`,
//! where each factor is `exp(±x_j)`, `sin(x_j)`, or `cos(x_j)`. The
//! grammar covers polynomial-times-transcendental sources without
//! pulling in a general expression parser.

use std::sync::Arc;

use collonet_core::pde::ScalarField;
use serde::{Deserialize, Serialize};

fn default_sign() -> i8 {
    1
}

/// A transcendental factor applied to one coordinate.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "fn", rename_all = "lowercase")]
pub enum Factor {
    Exp {
        axis: usize,
        #[serde(default = "default_sign")]
        sign: i8,
    },
    Sin {
        axis: usize,
    },
    Cos {
        axis: usize,
    },
}

/// One additive term of a field expression.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Term {
    pub coeff: f64,
    /// Integer exponent per coordinate; missing entries mean power 0.
    #[serde(default)]
    pub powers: Vec<u32>,
    #[serde(default)]
    pub factors: Vec<Factor>,
}

/// Rejects terms referencing coordinates outside the problem dimension.
pub fn validate(terms: &[Term], dimension: usize) -> Result<(), String> {
    for (i, term) in terms.iter().enumerate() {
        if !term.coeff.is_finite() {
            return Err(format!("term {i}: coefficient {} is not finite", term.coeff));
        }
        if term.powers.len() > dimension {
            return Err(format!(
                "term {i}: {} powers for a {dimension}-dimensional problem",
                term.powers.len()
            ));
        }
        for factor in &term.factors {
            let axis = match factor {
                Factor::Exp { axis, sign } => {
                    if *sign != 1 && *sign != -1 {
                        return Err(format!("term {i}: exp sign must be 1 or -1, got {sign}"));
                    }
                    *axis
                }
                Factor::Sin { axis } | Factor::Cos { axis } => *axis,
            };
            if axis >= dimension {
                return Err(format!(
                    "term {i}: factor axis {axis} out of range for dimension {dimension}"
                ));
            }
        }
    }
    Ok(())
}

pub fn eval(terms: &[Term], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|term| {
            let mut value = term.coeff;
            for (j, &power) in term.powers.iter().enumerate() {
                value *= x[j].powi(power as i32);
            }
            for factor in &term.factors {
                value *= match factor {
                    Factor::Exp { axis, sign } => (f64::from(*sign) * x[*axis]).exp(),
                    Factor::Sin { axis } => x[*axis].sin(),
                    Factor::Cos { axis } => x[*axis].cos(),
                };
            }
            value
        })
        .sum()
}

/// Wraps the term table as a shareable scalar field.
pub fn to_field(terms: Vec<Term>) -> ScalarField {
    Arc::new(move |x: &[f64]| eval(&terms, x))
}
