//! The explicit-constant ledger behind the induction on degree levels.
//!
//! Every magnitude is kept as a base-10 logarithm: the recursion squares ξ
//! and exponentiates L by R at every level, so linear values stop being
//! representable almost immediately. The ledger records, per level, the
//! constants (δ_i, ξ_i, b_i, C_i) and the intermediates of the step that
//! produced them, including which term of each min{…} was binding.
//!
//! Even log space has a ceiling: R grows like 1/ξ'², so once log10(R)
//! exceeds the float exponent range, log10(R·L^R) = log10 R + R·log10 L is
//! no longer finite. Construction reports that as an error instead of
//! saturating; the `r_cap` parameter truncates R for diagnostic towers that
//! are meant to stay finite (and is what the exact-rational cross-checks
//! use).

use crate::error::{Error, Result};
use serde::Serialize;

const LG2: f64 = std::f64::consts::LOG10_2;

fn lg(x: f64) -> f64 {
    x.log10()
}

/// A positive magnitude stored as log10. The sign field exists so a future
/// signed quantity can share the representation; everything here is +1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogMag {
    pub sign: i8,
    pub log10: f64,
}

impl LogMag {
    pub fn pos(log10: f64) -> Self {
        LogMag { sign: 1, log10 }
    }

    /// Linear value; 0 or ∞ once the exponent leaves f64 range.
    pub fn linear(&self) -> f64 {
        self.sign as f64 * 10f64.powf(self.log10)
    }
}

/// R from the weak-round count formula ⌈4^{k+1}k²K/(ξ')² + 1⌉. The exact
/// integer is kept while it fits comfortably into f64's integer range;
/// beyond that only log10 is kept and the +1 and ceiling are negligible
/// (relative error below 1e−15).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RValue {
    pub log10: f64,
    pub exact: Option<u64>,
}

/// Snap values a hair away from an integer back onto it before taking the
/// ceiling, so ⌈exact-integer arithmetic⌉ survives the float detour.
fn snap_ceil(y: f64) -> f64 {
    let r = y.round();
    if (y - r).abs() <= 1e-9 * y.abs().max(1.0) {
        r
    } else {
        y.ceil()
    }
}

/// log10 of 4^{k+1}·k²·K / (ξ')².
fn eq_r_log_x(k: usize, k_bound_log10: f64, xi_prime_log10: f64) -> f64 {
    (k as f64 + 1.0) * lg(4.0) + lg((k * k) as f64) + k_bound_log10 - 2.0 * xi_prime_log10
}

pub fn eq_r(k: usize, k_bound_log10: f64, xi_prime_log10: f64) -> RValue {
    let log_x = eq_r_log_x(k, k_bound_log10, xi_prime_log10);
    if log_x <= 15.0 {
        let r = snap_ceil(10f64.powf(log_x) + 1.0);
        RValue { log10: r.log10(), exact: Some(r as u64) }
    } else {
        RValue { log10: log_x, exact: None }
    }
}

/// Convenience wrapper on linear inputs.
pub fn eq_r_linear(k: usize, k_bound: f64, xi_prime: f64) -> Result<RValue> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be >= 2".into()));
    }
    if !(k_bound > 0.0) || !(xi_prime > 0.0) {
        return Err(Error::InvalidParameter("K and xi' must be positive".into()));
    }
    Ok(eq_r(k, lg(k_bound), lg(xi_prime)))
}

/// A positive function evaluated in log space. Implementations promise a
/// finite log10 output for any admissible input.
pub trait LogFn {
    fn eval_log10(&self, input_log10: f64) -> Result<f64>;
}

/// Constant positive value (ignores its input).
pub struct ConstLogFn {
    log10: f64,
}

impl ConstLogFn {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constant function value {value} must be positive and finite"
            )));
        }
        Ok(ConstLogFn { log10: lg(value) })
    }
}

impl LogFn for ConstLogFn {
    fn eval_log10(&self, _input_log10: f64) -> Result<f64> {
        Ok(self.log10)
    }
}

/// Step function given by (threshold, value) rows: the value of the largest
/// threshold not exceeding the input. Inputs below the first threshold are
/// refused — the table holds no promise there.
pub struct FloorTableLogFn {
    xs_log10: Vec<f64>,
    ys_log10: Vec<f64>,
}

impl FloorTableLogFn {
    pub fn from_plain(rows: &[(f64, f64)]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("table needs at least one row".into()));
        }
        for w in rows.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidParameter(
                    "table thresholds must be strictly increasing".into(),
                ));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidParameter(
                    "table values must be nondecreasing".into(),
                ));
            }
        }
        for &(x, y) in rows {
            if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "table row ({x}, {y}) must be positive and finite"
                )));
            }
        }
        Ok(FloorTableLogFn {
            xs_log10: rows.iter().map(|r| lg(r.0)).collect(),
            ys_log10: rows.iter().map(|r| lg(r.1)).collect(),
        })
    }
}

impl LogFn for FloorTableLogFn {
    fn eval_log10(&self, input_log10: f64) -> Result<f64> {
        let idx = self.xs_log10.partition_point(|&x| x <= input_log10);
        if idx == 0 {
            return Err(Error::InvalidParameter(format!(
                "input 10^{input_log10:.3} below the table's first threshold 10^{:.3}",
                self.xs_log10[0]
            )));
        }
        Ok(self.ys_log10[idx - 1])
    }
}

/// The minimum of named log-magnitudes; near-ties (1e−12 relative) resolve
/// to the lexicographically first name so reports are stable.
fn named_min(terms: &[(&str, f64)]) -> (String, f64) {
    let m = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * m.abs().max(1.0);
    let name = terms
        .iter()
        .filter(|t| t.1 <= m + tol)
        .map(|t| t.0)
        .min()
        .expect("terms nonempty");
    (name.to_string(), m)
}

#[derive(Clone, Debug, Serialize)]
pub struct StepIntermediates {
    pub eta: LogMag,
    pub eta_binding: String,
    pub b_hat: LogMag,
    pub r: RValue,
    pub b_star: LogMag,
    pub b_star_binding: String,
    /// L = 3/b*.
    pub growth: LogMag,
    /// R·L^R, the per-step inflation factor.
    pub inflation: LogMag,
    pub b_binding: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelEntry {
    pub level: usize,
    pub delta: LogMag,
    pub xi: LogMag,
    pub b: LogMag,
    pub c: LogMag,
    /// None at level 0.
    pub step: Option<StepIntermediates>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsLedger {
    pub k: usize,
    pub k_bound: LogMag,
    pub alpha: f64,
    pub delta_target: LogMag,
    pub beta_floor: LogMag,
    pub r_cap: Option<u64>,
    pub levels: Vec<LevelEntry>,
}

fn apply_cap(r: RValue, cap: Option<u64>) -> RValue {
    match cap {
        None => r,
        Some(c) => {
            let capped = match r.exact {
                Some(e) => e.min(c),
                // log10 > 15 means the true R dwarfs any practical cap.
                None => c,
            };
            RValue { log10: (capped as f64).log10(), exact: Some(capped) }
        }
    }
}

/// log10 of R·L^R from a (possibly inexact) R and log10 L.
fn inflation_log(r: &RValue, growth_log10: f64) -> f64 {
    let r_linear = match r.exact {
        Some(e) => e as f64,
        None => 10f64.powf(r.log10),
    };
    r.log10 + r_linear * growth_log10
}

impl ConstantsLedger {
    /// Evaluate the whole recursion bottom-up. `eps_stab` maps a stability
    /// margin δ to the edge-density ε it buys; `b_hat_fn` maps the deletion
    /// allowance η to an exponent b̂. Both come from external statements and
    /// are injected, never derived here. `beta_floor` stands in for the
    /// density β the formulas reference before it is quantified; α/2 is a
    /// reasonable choice. `r_cap` truncates R so towers stay finite.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        k: usize,
        k_bound: f64,
        alpha: f64,
        delta: f64,
        eps_stab: &dyn LogFn,
        b_hat_fn: &dyn LogFn,
        beta_floor: f64,
        r_cap: Option<u64>,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter("k must be >= 2".into()));
        }
        if !(k_bound > 0.0) || !k_bound.is_finite() {
            return Err(Error::InvalidParameter(format!("K={k_bound} must be positive")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha={alpha} outside (0,1]")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta={delta} outside (0,1]")));
        }
        if !(beta_floor > 0.0 && beta_floor <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta_floor={beta_floor} outside (0,1]"
            )));
        }
        if let Some(c) = r_cap {
            if c < 2 {
                return Err(Error::InvalidParameter("r_cap must be >= 2".into()));
            }
        }
        let k_bound_lg = lg(k_bound);
        let beta_lg = lg(beta_floor);
        let delta_lg_at = |i: usize| lg(delta) - ((k - i) as f64) * lg(4.0);

        // Base level: ξ_0 = eps_stab(δ_0/2), b_0 = δ_0/32, C_0 = 1.
        let d0 = delta_lg_at(0);
        let xi0 = eps_stab.eval_log10(d0 - LG2)?;
        if !xi0.is_finite() || xi0 > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eps_stab must return a value in (0,1]; got 10^{xi0}"
            )));
        }
        let mut levels = vec![LevelEntry {
            level: 0,
            delta: LogMag::pos(d0),
            xi: LogMag::pos(xi0),
            b: LogMag::pos(d0 - lg(32.0)),
            c: LogMag::pos(0.0),
            step: None,
        }];

        for t in 1..=k {
            let prev = &levels[t - 1];
            let xi_p = prev.xi.log10;
            let b_p = prev.b.log10;
            let c_p = prev.c.log10;
            let d_t = delta_lg_at(t);

            let (eta_binding, eta) =
                named_min(&[("delta/8", d_t - lg(8.0)), ("xi'/4", xi_p - lg(4.0))]);
            let b_hat = b_hat_fn.eval_log10(eta)?;
            if !b_hat.is_finite() {
                return Err(Error::InvalidParameter("b_hat_fn returned a non-finite value".into()));
            }
            let r = apply_cap(eq_r(k, k_bound_lg, xi_p), r_cap);
            let (b_star_binding, b_star) = named_min(&[
                ("b'/4", b_p - lg(4.0)),
                ("b_hat/4", b_hat - lg(4.0)),
                ("beta*xi'^2/256", beta_lg + 2.0 * xi_p - lg(256.0)),
            ]);
            let growth = lg(3.0) - b_star;
            let inflation = inflation_log(&r, growth);
            if !inflation.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "log10(R*L^R) left f64 range at level {t}; rerun with r_cap to \
                     truncate the tower"
                )));
            }
            let xi = 2.0 * xi_p - lg(8.0 * k as f64) - (t as f64) * inflation;
            let (b_binding, b) = named_min(&[
                ("b*/(40RL^R)", b_star - lg(40.0) - inflation),
                ("xi'^2/256", 2.0 * xi_p - lg(256.0)),
            ]);
            let c = inflation + c_p;
            for (name, v) in [("xi", xi), ("b", b), ("C", c)] {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "log10({name}) left f64 range at level {t}; rerun with r_cap"
                    )));
                }
            }
            levels.push(LevelEntry {
                level: t,
                delta: LogMag::pos(d_t),
                xi: LogMag::pos(xi),
                b: LogMag::pos(b),
                c: LogMag::pos(c),
                step: Some(StepIntermediates {
                    eta: LogMag::pos(eta),
                    eta_binding,
                    b_hat: LogMag::pos(b_hat),
                    r,
                    b_star: LogMag::pos(b_star),
                    b_star_binding,
                    growth: LogMag::pos(growth),
                    inflation: LogMag::pos(inflation),
                    b_binding,
                }),
            });
        }
        Ok(ConstantsLedger {
            k,
            k_bound: LogMag::pos(k_bound_lg),
            alpha,
            delta_target: LogMag::pos(lg(delta)),
            beta_floor: LogMag::pos(beta_lg),
            r_cap,
            levels,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerCheck {
    pub checked_equations: usize,
    /// (level, which min, binding term) for every min{…} in the ledger.
    pub bindings: Vec<(usize, String, String)>,
    pub violations: Vec<String>,
}

fn log_tol(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

struct Checker {
    checked: usize,
    bindings: Vec<(usize, String, String)>,
    violations: Vec<String>,
}

impl Checker {
    fn eq(&mut self, level: usize, name: &str, stored: f64, computed: f64) {
        self.checked += 1;
        if (stored - computed).abs() > log_tol(computed) {
            self.violations.push(format!(
                "level {level}: {name} stored 10^{stored} != derived 10^{computed}"
            ));
        }
    }

    fn named(&mut self, level: usize, which: &str, stored: &str, derived: &str) {
        self.checked += 1;
        self.bindings.push((level, which.into(), derived.into()));
        if stored != derived {
            self.violations.push(format!(
                "level {level}: {which} binding stored {stored} != derived {derived}"
            ));
        }
    }

    fn assert_true(&mut self, cond: bool, msg: String) {
        self.checked += 1;
        if !cond {
            self.violations.push(msg);
        }
    }
}

/// Re-derive every stored equation from the stored inputs and compare at
/// 1e−9 relative tolerance in log space. The two injected functions are
/// inputs, not equations, so ξ_0 and b̂ values are taken as given.
pub fn check_constraints(ledger: &ConstantsLedger) -> Result<LedgerCheck> {
    let mut c = Checker { checked: 0, bindings: Vec::new(), violations: Vec::new() };
    let k = ledger.k;
    let delta_lg = ledger.delta_target.log10;

    if ledger.levels.len() != k + 1 {
        return Err(Error::LedgerInconsistency(format!(
            "expected {} levels, found {}",
            k + 1,
            ledger.levels.len()
        )));
    }
    for (t, entry) in ledger.levels.iter().enumerate() {
        c.eq(t, "delta", entry.delta.log10, delta_lg - ((k - t) as f64) * lg(4.0));
        if t == 0 {
            c.eq(0, "b", entry.b.log10, entry.delta.log10 - lg(32.0));
            c.eq(0, "C", entry.c.log10, 0.0);
            c.assert_true(entry.xi.log10 <= 0.0, "level 0: xi above 1".into());
            continue;
        }
        let Some(step) = &entry.step else {
            c.violations.push(format!("level {t}: missing step intermediates"));
            continue;
        };
        let prev = &ledger.levels[t - 1];
        let xi_p = prev.xi.log10;
        let b_p = prev.b.log10;

        let (eta_binding, eta) =
            named_min(&[("delta/8", entry.delta.log10 - lg(8.0)), ("xi'/4", xi_p - lg(4.0))]);
        c.eq(t, "eta", step.eta.log10, eta);
        c.named(t, "eta", &step.eta_binding, &eta_binding);

        let r = apply_cap(eq_r(k, ledger.k_bound.log10, xi_p), ledger.r_cap);
        c.eq(t, "R", step.r.log10, r.log10);
        c.assert_true(
            step.r.exact == r.exact,
            format!("level {t}: R exact value stored {:?} != derived {:?}", step.r.exact, r.exact),
        );
        if let Some(e) = step.r.exact {
            c.assert_true(e >= 2, format!("level {t}: R={e} below 2"));
        }

        let (b_star_binding, b_star) = named_min(&[
            ("b'/4", b_p - lg(4.0)),
            ("b_hat/4", step.b_hat.log10 - lg(4.0)),
            ("beta*xi'^2/256", ledger.beta_floor.log10 + 2.0 * xi_p - lg(256.0)),
        ]);
        c.eq(t, "b*", step.b_star.log10, b_star);
        c.named(t, "b*", &step.b_star_binding, &b_star_binding);

        c.eq(t, "L", step.growth.log10, lg(3.0) - step.b_star.log10);
        c.eq(t, "R*L^R", step.inflation.log10, inflation_log(&step.r, step.growth.log10));
        c.eq(
            t,
            "xi",
            entry.xi.log10,
            2.0 * xi_p - lg(8.0 * k as f64) - (t as f64) * step.inflation.log10,
        );
        let (b_binding, b) = named_min(&[
            ("b*/(40RL^R)", step.b_star.log10 - lg(40.0) - step.inflation.log10),
            ("xi'^2/256", 2.0 * xi_p - lg(256.0)),
        ]);
        c.eq(t, "b", entry.b.log10, b);
        c.named(t, "b", &step.b_binding, &b_binding);
        c.eq(t, "C", entry.c.log10, step.inflation.log10 + prev.c.log10);

        // Monotonicity forced by the min/product forms.
        c.assert_true(entry.xi.log10 <= xi_p + log_tol(xi_p), format!("level {t}: xi not <= xi'"));
        c.assert_true(
            entry.xi.log10 <= 2.0 * xi_p + log_tol(2.0 * xi_p),
            format!("level {t}: xi above xi'^2"),
        );
        c.assert_true(
            entry.c.log10 >= prev.c.log10 - log_tol(prev.c.log10),
            format!("level {t}: C decreased"),
        );
        c.assert_true(entry.b.log10 <= b_p + log_tol(b_p), format!("level {t}: b not <= b'"));
    }

    if c.violations.is_empty() {
        Ok(LedgerCheck {
            checked_equations: c.checked,
            bindings: c.bindings,
            violations: c.violations,
        })
    } else {
        Err(Error::LedgerInconsistency(c.violations.join("; ")))
    }
}
