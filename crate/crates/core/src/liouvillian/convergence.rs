use super::Observables;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ConvergenceRow<T> {
    pub truncation: T,
    pub observables: Observables,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable<T> {
    pub rows: Vec<ConvergenceRow<T>>,
    /// Relative change |x_{k+1} − x_k|/|x_k| between successive rows.
    pub deltas: Vec<Observables>,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs()
    }
}

impl<T> ConvergenceTable<T> {
    /// Largest relative change in either g² over the whole ladder.
    pub fn max_g2_delta(&self) -> f64 {
        self.deltas.iter().map(|d| d.g2_c.max(d.g2_e)).fold(0.0, f64::max)
    }
}

/// Evaluates `builder` at each truncation in order.
pub fn convergence_scan<T: Clone, F>(builder: F, truncations: &[T]) -> Result<ConvergenceTable<T>>
where
    F: Fn(&T) -> Result<Observables>,
{
    if truncations.is_empty() {
        return Err(Error::InvalidParams("convergence scan needs at least one truncation".into()));
    }
    let rows = truncations
        .iter()
        .map(|t| Ok(ConvergenceRow { truncation: t.clone(), observables: builder(t)? }))
        .collect::<Result<Vec<_>>>()?;
    let deltas = rows
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0].observables, &w[1].observables);
            Observables {
                g2_c: rel(a.g2_c, b.g2_c),
                g2_e: rel(a.g2_e, b.g2_e),
                n_c: rel(a.n_c, b.n_c),
                n_e: rel(a.n_e, b.n_e),
            }
        })
        .collect();
    Ok(ConvergenceTable { rows, deltas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::effective_observables;
    use crate::model::SystemParams;

    #[test]
    fn single_truncation_has_no_deltas() {
        let t = convergence_scan(|_: &usize| Ok(Observables { g2_c: 1.0, g2_e: 1.0, n_c: 0.1, n_e: 0.1 }), &[4]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.deltas.is_empty());
        assert!(convergence_scan(|_: &usize| unreachable!(), &[]).is_err());
    }

    #[test]
    fn weak_drive_occupation_settles_by_four_levels() {
        let p = SystemParams::baseline().with_detuning(-1e5);
        let t = convergence_scan(|&n| effective_observables(&p, n), &[4, 6]).unwrap();
        assert!(t.rows[0].observables.n_c < 1e-2);
        assert!(t.deltas[0].n_c < 1e-6, "{:?}", t.deltas);
    }
}
