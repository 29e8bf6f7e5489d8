//! Convergence tables: one sweep parameter per row, measured value against
//! its target, with the error columns every ladder report shares.

use num_complex::Complex64 as C64;

/// One sweep point. `parameter` is the ladder coordinate (a depth `mu` or a
/// frame scale `tau`, depending on the experiment).
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub parameter: f64,
    pub measured: C64,
    pub target: C64,
}

impl ConvergenceRow {
    pub fn abs_error(&self) -> f64 {
        (self.measured - self.target).norm()
    }

    /// Relative error against the target magnitude; falls back to the
    /// absolute error when the target is exactly zero.
    pub fn rel_error(&self) -> f64 {
        let t = self.target.norm();
        if t > 0.0 {
            self.abs_error() / t
        } else {
            self.abs_error()
        }
    }
}

/// Probing-frame metadata attached to tables that sweep one frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameMeta {
    pub xi: [f64; 2],
    pub eta: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Clone, Debug, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub frame: Option<FrameMeta>,
}

/// Real values print bare; complex ones as `re+imi` / `re-imi`.
fn fmt_value(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}", z)
    }
}

impl ConvergenceTable {
    pub fn new() -> Self {
        ConvergenceTable::default()
    }

    pub fn with_frame(xi: [f64; 2], eta: [f64; 2], y: [f64; 2]) -> Self {
        ConvergenceTable { rows: Vec::new(), frame: Some(FrameMeta { xi, eta, y }) }
    }

    pub fn push(&mut self, parameter: f64, measured: C64, target: C64) {
        self.rows.push(ConvergenceRow { parameter, measured, target });
    }

    pub fn push_real(&mut self, parameter: f64, measured: f64, target: f64) {
        self.push(parameter, C64::new(measured, 0.0), C64::new(target, 0.0));
    }

    /// Largest relative error over the rows (zero for an empty table).
    pub fn worst_rel_error(&self) -> f64 {
        self.rows.iter().map(ConvergenceRow::rel_error).fold(0.0, f64::max)
    }

    /// True when the relative errors shrink strictly from row to row.
    pub fn strictly_improving(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].rel_error() < w[0].rel_error())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(m) = &self.frame {
            out.push_str(&format!(
                "# frame xi=({} {}) eta=({} {}) y=({} {})\n",
                m.xi[0], m.xi[1], m.eta[0], m.eta[1], m.y[0], m.y[1]
            ));
        }
        out.push_str("mu_or_tau,measured,target,abs_error,rel_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.parameter,
                fmt_value(r.measured),
                fmt_value(r.target),
                r.abs_error(),
                r.rel_error()
            ));
        }
        out
    }
}
