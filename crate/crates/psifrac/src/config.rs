//! Config-file ingestion for the command line.
//!
//! The document is TOML with a fixed schema; unknown keys are rejected and
//! every numeric range is validated before any computation starts, with the
//! offending key named in the error.

use serde::Deserialize;
use std::path::Path;
use std::sync::Arc;

use crate::certify::Assumptions;
use crate::error::ConfigError;
use crate::expr;
use crate::langevin::{LangevinProblem, Orders, RhsFn, SolverConfig};
use crate::manufactured::Manufactured;
use crate::psi::{Domain, PsiFunction};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: Option<String>,
    psi: PsiSection,
    domain: DomainSection,
    orders: OrdersSection,
    params: ParamsSection,
    rhs: Option<RhsSection>,
    solver: Option<SolverSection>,
    assumptions: Option<AssumptionsSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PsiSection {
    kind: String,
    param: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainSection {
    a: f64,
    eta: f64,
    xi: f64,
    #[serde(rename = "T")]
    t_end: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrdersSection {
    rho: f64,
    sigma: f64,
    delta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSection {
    lambda: f64,
    mu: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RhsSection {
    expr: Option<String>,
    manufactured: Option<ManufacturedSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManufacturedSection {
    kappa: Option<f64>,
    coeffs: Option<Vec<f64>>,
    lip1: Option<f64>,
    lip2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    n: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    omega: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssumptionsSection {
    l1: Option<f64>,
    l2: Option<f64>,
    l: Option<f64>,
    epsilon: Option<f64>,
    phi: Option<String>,
    l_phi: Option<f64>,
}

/// How the right-hand side was specified.
#[derive(Clone)]
pub enum RhsSpec {
    Expr(String),
    Manufactured {
        kappa: f64,
        coeffs: Option<Vec<f64>>,
        lip1: f64,
        lip2: f64,
    },
}

/// A fully validated run configuration.
pub struct RunConfig {
    pub problem: LangevinProblem,
    pub solver: SolverConfig,
    pub assumptions: Assumptions,
    pub rhs_spec: RhsSpec,
    /// exact solution evaluator when the rhs is manufactured
    pub manufactured: Option<Manufactured>,
}

impl std::fmt::Debug for RunConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunConfig")
            .field("problem", &self.problem)
            .field("solver", &self.solver)
            .finish_non_exhaustive()
    }
}

fn range_err(key: &str, constraint: &str) -> ConfigError {
    ConfigError::RangeError {
        key: key.into(),
        constraint: constraint.into(),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            ConfigError::SchemaError(msg)
        } else {
            ConfigError::ParseError(msg)
        }
    })?;

    if let Some(schema) = &raw.schema {
        if schema != SCHEMA_VERSION {
            return Err(ConfigError::SchemaError(format!(
                "schema: expected \"{SCHEMA_VERSION}\", got \"{schema}\""
            )));
        }
    }

    let psi = match raw.psi.kind.as_str() {
        "identity" => {
            if raw.psi.param.is_some() {
                return Err(range_err("psi.param", "identity takes no parameter"));
            }
            PsiFunction::identity()
        }
        "log" => {
            if raw.psi.param.is_some() {
                return Err(range_err("psi.param", "log takes no parameter"));
            }
            PsiFunction::logarithm()
        }
        "power" => {
            let rho = raw
                .psi
                .param
                .ok_or_else(|| range_err("psi.param", "power requires an exponent > 0"))?;
            PsiFunction::power_law(rho)
                .map_err(|_| range_err("psi.param", "power exponent must be > 0"))?
        }
        other => {
            return Err(range_err(
                "psi.kind",
                &format!("one of identity|log|power, got \"{other}\""),
            ))
        }
    };

    let d = &raw.domain;
    if !(d.a < d.eta && d.eta < d.xi && d.xi < d.t_end) {
        return Err(range_err("domain", "need a < eta < xi < T"));
    }
    if d.a < 0.0 {
        return Err(range_err("domain.a", "a must be >= 0"));
    }
    if raw.psi.kind == "log" && d.a <= 0.0 {
        return Err(range_err("domain.a", "log generator requires a > 0"));
    }
    let domain = Domain::new(d.a, d.eta, d.xi, d.t_end)
        .map_err(|e| range_err("domain", &e.to_string()))?;

    let o = &raw.orders;
    if !(o.rho > 1.0 && o.rho <= 2.0) {
        return Err(range_err("orders.rho", "need 1 < rho <= 2"));
    }
    if !(o.sigma > 0.0 && o.sigma <= 1.0) {
        return Err(range_err("orders.sigma", "need 0 < sigma <= 1"));
    }
    if !(o.delta > 0.0 && o.delta < o.sigma) {
        return Err(range_err("orders.delta", "need 0 < delta < sigma"));
    }
    let orders = Orders::new(o.rho, o.sigma, o.delta)
        .map_err(|e| range_err("orders", &e.to_string()))?;

    if !(raw.params.lambda >= 0.0) || !raw.params.lambda.is_finite() {
        return Err(range_err("params.lambda", "lambda must be finite and >= 0"));
    }
    if !(raw.params.mu >= 0.0) || !raw.params.mu.is_finite() {
        return Err(range_err("params.mu", "mu must be finite and >= 0"));
    }

    let solver = match &raw.solver {
        None => SolverConfig::default(),
        Some(s) => {
            let cfg = SolverConfig {
                n: s.n.unwrap_or(512),
                tol: s.tol.unwrap_or(1e-10),
                max_iter: s.max_iter.unwrap_or(200),
                omega: s.omega.unwrap_or(1.0),
            };
            if cfg.n < 4 {
                return Err(range_err("solver.n", "need n >= 4"));
            }
            if !(cfg.tol > 0.0) {
                return Err(range_err("solver.tol", "need tol > 0"));
            }
            if cfg.max_iter == 0 {
                return Err(range_err("solver.max_iter", "need max_iter >= 1"));
            }
            if !(cfg.omega > 0.0 && cfg.omega <= 1.0) {
                return Err(range_err("solver.omega", "need 0 < omega <= 1"));
            }
            cfg
        }
    };

    let rhs_spec = match &raw.rhs {
        None => RhsSpec::Expr("zero".into()),
        Some(r) => match (&r.expr, &r.manufactured) {
            (Some(_), Some(_)) => {
                return Err(range_err("rhs", "give either expr or manufactured, not both"))
            }
            (Some(id), None) if id == "manufactured" => RhsSpec::Manufactured {
                kappa: 4.0,
                coeffs: None,
                lip1: 0.0,
                lip2: 0.0,
            },
            (Some(id), None) => {
                if !expr::RHS_IDS.contains(&id.as_str()) {
                    return Err(range_err(
                        "rhs.expr",
                        &format!("unknown id \"{id}\"; known: {:?}", expr::RHS_IDS),
                    ));
                }
                RhsSpec::Expr(id.clone())
            }
            (None, Some(m)) => {
                let kappa = m.kappa.unwrap_or(4.0);
                if !(kappa >= 3.0) {
                    return Err(range_err("rhs.manufactured.kappa", "need kappa >= 3"));
                }
                let lip1 = m.lip1.unwrap_or(0.0);
                let lip2 = m.lip2.unwrap_or(0.0);
                if lip1 < 0.0 || lip2 < 0.0 {
                    return Err(range_err(
                        "rhs.manufactured.lip1/lip2",
                        "coupling strengths must be >= 0",
                    ));
                }
                RhsSpec::Manufactured {
                    kappa,
                    coeffs: m.coeffs.clone(),
                    lip1,
                    lip2,
                }
            }
            (None, None) => return Err(range_err("rhs", "needs expr or manufactured")),
        },
    };

    let mut manufactured = None;
    let rhs: RhsFn = match &rhs_spec {
        RhsSpec::Expr(id) => expr::rhs(id, psi.clone(), psi.eval(domain.a))
            .ok_or_else(|| range_err("rhs.expr", &format!("unknown id \"{id}\"")))?,
        RhsSpec::Manufactured {
            kappa,
            coeffs,
            lip1,
            lip2,
        } => {
            let m = match coeffs {
                Some(c) => Manufactured::with_coefficients(
                    psi.clone(),
                    domain,
                    orders,
                    raw.params.lambda,
                    raw.params.mu,
                    *kappa,
                    c,
                    *lip1,
                    *lip2,
                ),
                None => Manufactured::new(
                    psi.clone(),
                    domain,
                    orders,
                    raw.params.lambda,
                    raw.params.mu,
                    *kappa,
                    *lip1,
                    *lip2,
                ),
            }
            .map_err(|e| range_err("rhs.manufactured", &e.to_string()))?;
            let rhs = m.problem.rhs.clone();
            manufactured = Some(m);
            rhs
        }
    };

    let problem = LangevinProblem::new(orders, raw.params.lambda, raw.params.mu, domain, psi, rhs)
        .map_err(|e| range_err("params", &e.to_string()))?;

    let mut assumptions = Assumptions::default();
    if let Some(a) = &raw.assumptions {
        for (key, v) in [("assumptions.l1", a.l1), ("assumptions.l2", a.l2), ("assumptions.l", a.l)]
        {
            if let Some(v) = v {
                if !(v >= 0.0) {
                    return Err(range_err(key, "must be >= 0"));
                }
            }
        }
        assumptions.lip1 = a.l1;
        assumptions.lip2 = a.l2;
        assumptions.bound = a.l;
        assumptions.epsilon = a.epsilon.unwrap_or(1.0);
        if !(assumptions.epsilon >= 0.0) {
            return Err(range_err("assumptions.epsilon", "must be >= 0"));
        }
        if let Some(id) = &a.phi {
            assumptions.phi = Some(
                expr::weight(id)
                    .ok_or_else(|| range_err("assumptions.phi", &format!("unknown id \"{id}\"")))?,
            );
        }
        if let Some(l) = a.l_phi {
            if !(l > 0.0) {
                return Err(range_err("assumptions.l_phi", "must be > 0"));
            }
            assumptions.l_phi = Some(l);
        }
    } else {
        assumptions.epsilon = 1.0;
    }
    // default Lipschitz data for catalog right-hand sides
    if assumptions.lip1.is_none() || assumptions.lip2.is_none() {
        if let RhsSpec::Expr(id) = &rhs_spec {
            if let Some((l1, l2)) = expr::rhs_lipschitz(id) {
                assumptions.lip1.get_or_insert(l1);
                assumptions.lip2.get_or_insert(l2);
            }
        }
        if let RhsSpec::Manufactured { lip1, lip2, .. } = &rhs_spec {
            assumptions.lip1.get_or_insert(*lip1);
            assumptions.lip2.get_or_insert(*lip2);
        }
    }

    Ok(RunConfig {
        problem,
        solver,
        assumptions,
        rhs_spec,
        manufactured,
    })
}

/// Convenience for building a phi closure out of a weight id.
pub fn weight_by_id(id: &str) -> Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    expr::weight(id)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[psi]
kind = "identity"

[domain]
a = 0.0
eta = 0.25
xi = 0.375
T = 0.5

[orders]
rho = 1.5
sigma = 0.9
delta = 0.3

[params]
lambda = 0.05
mu = 0.1
"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.solver.n, 512);
        assert_eq!(cfg.solver.tol, 1e-10);
        assert_eq!(cfg.solver.max_iter, 200);
        assert_eq!(cfg.solver.omega, 1.0);
        assert!(matches!(cfg.rhs_spec, RhsSpec::Expr(ref id) if id == "zero"));
    }

    #[test]
    fn delta_ge_sigma_names_key() {
        let text = MINIMAL.replace("delta = 0.3", "delta = 0.9").replace("sigma = 0.9", "sigma = 0.5");
        let err = parse_config_str(&text).unwrap_err();
        match err {
            ConfigError::RangeError { key, .. } => assert_eq!(key, "orders.delta"),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn domain_ordering_names_key() {
        let text = MINIMAL.replace("eta = 0.25", "eta = 0.4");
        let err = parse_config_str(&text).unwrap_err();
        match err {
            ConfigError::RangeError { key, .. } => assert_eq!(key, "domain"),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{MINIMAL}\n[solver]\nunknown_knob = 3\n");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::SchemaError(_))
        ));
    }

    #[test]
    fn schema_version_checked() {
        let text = format!("schema = \"99\"\n{MINIMAL}");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::SchemaError(_))
        ));
        let ok = format!("schema = \"1\"\n{MINIMAL}");
        assert!(parse_config_str(&ok).is_ok());
    }

    #[test]
    fn manufactured_rhs_section() {
        let text = format!(
            "{MINIMAL}\n[rhs.manufactured]\nkappa = 4.0\nlip1 = 0.05\nlip2 = 0.05\n"
        );
        let cfg = parse_config_str(&text).unwrap();
        assert!(cfg.manufactured.is_some());
        assert_eq!(cfg.assumptions.lip1, Some(0.05));
        // kappa below 3 rejected with the key named
        let bad = format!("{MINIMAL}\n[rhs.manufactured]\nkappa = 2.0\n");
        match parse_config_str(&bad).unwrap_err() {
            ConfigError::RangeError { key, .. } => assert_eq!(key, "rhs.manufactured.kappa"),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn catalog_rhs_lipschitz_defaults() {
        let text = format!("{MINIMAL}\n[rhs]\nexpr = \"mixed\"\n");
        let cfg = parse_config_str(&text).unwrap();
        assert_eq!(cfg.assumptions.lip1, Some(0.5));
        assert_eq!(cfg.assumptions.lip2, Some(0.5));
    }

    #[test]
    fn malformed_toml_is_parse_error() {
        assert!(matches!(
            parse_config_str("this is not toml ["),
            Err(ConfigError::ParseError(_))
        ));
    }
}
