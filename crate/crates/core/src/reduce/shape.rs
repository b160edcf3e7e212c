//! Structural checks on reducts.

use crate::reduced::{AtomKey, RFormula};

/// Checks that every atom, with applications read as opaque variables,
/// has at most two terms and only unit coefficients.
pub fn check_utvpi(f: &RFormula) -> Result<(), String> {
    let mut bad = None;
    f.visit_atoms(&mut |op, a, b| {
        if bad.is_some() {
            return;
        }
        let key = AtomKey::new(op, a, b);
        if key.coeffs.len() > 2 || key.coeffs.iter().any(|(_, c)| c.abs() != 1) {
            bad = Some(RFormula::Cmp(op, a.clone(), b.clone()).to_string());
        }
    });
    match bad {
        Some(atom) => Err(format!("atom is not UTVPI-shaped: {atom}")),
        None => Ok(()),
    }
}
