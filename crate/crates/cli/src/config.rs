//! Experiment files: TOML with `[instance]`, `[procedure]`, `[harness]` and
//! `[pool]` sections plus a top-level `schema_version`.

use std::collections::BTreeSet;
use std::path::Path;

use rankselect_core::fixed_budget::KgPrior;
use rankselect_core::fixed_precision::FhnVariance;
use rankselect_core::harness::{ExperimentConfig, InstanceSpec, ProcedureSpec};
use rankselect_core::parallel::{Backend, DelayModel, PoolSpec};
use rankselect_core::ProblemInstance;
use toml::{Table, Value};

use crate::CliError;

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessSection {
    pub replications: u64,
    pub good_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub instance: ProblemInstance,
    pub procedure: ProcedureSpec,
    pub seed: Option<u64>,
    pub harness: Option<HarnessSection>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config {
            key: "<file>".into(),
            reason: e.message().to_string(),
        })?;
        let mut top = Section::new("", &root);
        let version = top.int("schema_version")?;
        if version != SCHEMA_VERSION {
            return Err(cfg_err("schema_version", format!("unsupported version {version}, expected {SCHEMA_VERSION}")));
        }
        let instance = parse_instance(top.table("instance")?)?;
        let proc_table = top.table("procedure")?;
        let harness_table = top.opt_table("harness")?;
        let pool_table = top.opt_table("pool")?;
        top.finish()?;

        let pool = pool_table.map(parse_pool).transpose()?;
        let procedure = parse_procedure(proc_table, pool)?;

        let (seed, harness) = match harness_table {
            None => (None, None),
            Some(t) => {
                let mut s = Section::new("harness", t);
                let seed = s.opt_u64("seed")?;
                let replications = s.opt_u64("replications")?;
                let good_delta = s.opt_f64("good_delta")?;
                s.finish()?;
                let h = replications.map(|replications| HarnessSection { replications, good_delta });
                if h.is_none() && good_delta.is_some() {
                    return Err(cfg_err("harness.replications", "required when good_delta is set"));
                }
                (seed, h)
            }
        };
        Ok(Self { instance, procedure, seed, harness })
    }

    /// Command-line seed wins over the file.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        flag.or(self.seed)
            .ok_or_else(|| cfg_err("harness.seed", "missing; set it in the file or pass --seed"))
    }

    pub fn experiment(&self, seed: Option<u64>, jobs: Option<usize>) -> Result<ExperimentConfig, CliError> {
        let h = self
            .harness
            .as_ref()
            .ok_or_else(|| cfg_err("harness.replications", "missing required key"))?;
        let mut e = ExperimentConfig::new(
            self.instance.clone(),
            self.procedure.clone(),
            h.replications,
            self.resolve_seed(seed)?,
        );
        e.good_delta = h.good_delta;
        e.jobs = jobs;
        Ok(e)
    }
}

fn cfg_err(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// One table plus the keys consumed from it, so leftovers can be rejected.
struct Section<'a> {
    prefix: &'a str,
    table: &'a Table,
    used: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn new(prefix: &'a str, table: &'a Table) -> Self {
        Self { prefix, table, used: BTreeSet::new() }
    }

    fn path(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn get(&mut self, key: &'a str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.get(key)
    }

    fn need<T>(&mut self, key: &'a str, v: Option<T>) -> Result<T, CliError> {
        v.ok_or_else(|| cfg_err(&self.path(key), "missing required key"))
    }

    fn wrong(&self, key: &str, want: &str) -> CliError {
        cfg_err(&self.path(key), format!("expected {want}"))
    }

    fn opt_table(&mut self, key: &'a str) -> Result<Option<&'a Table>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(self.wrong(key, "a section")),
        }
    }

    fn table(&mut self, key: &'a str) -> Result<&'a Table, CliError> {
        let t = self.opt_table(key)?;
        self.need(key, t)
    }

    fn opt_int(&mut self, key: &'a str) -> Result<Option<i64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(self.wrong(key, "an integer")),
        }
    }

    fn int(&mut self, key: &'a str) -> Result<i64, CliError> {
        let v = self.opt_int(key)?;
        self.need(key, v)
    }

    fn opt_u64(&mut self, key: &'a str) -> Result<Option<u64>, CliError> {
        match self.opt_int(key)? {
            None => Ok(None),
            Some(i) => u64::try_from(i).map(Some).map_err(|_| self.wrong(key, "a non-negative integer")),
        }
    }

    fn u64(&mut self, key: &'a str) -> Result<u64, CliError> {
        let v = self.opt_u64(key)?;
        self.need(key, v)
    }

    fn usize(&mut self, key: &'a str) -> Result<usize, CliError> {
        let v = self.u64(key)?;
        usize::try_from(v).map_err(|_| self.wrong(key, "a smaller integer"))
    }

    fn opt_f64(&mut self, key: &'a str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.wrong(key, "a number")),
        }
    }

    fn f64(&mut self, key: &'a str) -> Result<f64, CliError> {
        let v = self.opt_f64(key)?;
        self.need(key, v)
    }

    fn opt_str(&mut self, key: &'a str) -> Result<Option<&'a str>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(self.wrong(key, "a string")),
        }
    }

    fn str(&mut self, key: &'a str) -> Result<&'a str, CliError> {
        let v = self.opt_str(key)?;
        self.need(key, v)
    }

    fn opt_vec_f64(&mut self, key: &'a str) -> Result<Option<Vec<f64>>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(self.wrong(key, "an array of numbers")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(self.wrong(key, "an array of numbers")),
        }
    }

    fn vec_f64(&mut self, key: &'a str) -> Result<Vec<f64>, CliError> {
        let v = self.opt_vec_f64(key)?;
        self.need(key, v)
    }

    fn finish(self) -> Result<(), CliError> {
        match self.table.keys().find(|k| !self.used.contains(k.as_str())) {
            Some(k) => Err(cfg_err(&self.path(k), "unknown key")),
            None => Ok(()),
        }
    }
}

fn core_err(e: rankselect_core::Error) -> CliError {
    match e {
        rankselect_core::Error::InvalidConfig { key, reason } => CliError::Config { key, reason },
        other => CliError::Core(other),
    }
}

fn parse_instance(t: &Table) -> Result<ProblemInstance, CliError> {
    let mut s = Section::new("instance", t);
    let spec = match s.str("generator")? {
        "slippage" => InstanceSpec::Slippage {
            k: s.usize("k")?,
            delta: s.f64("delta")?,
            variance: s.f64("variance")?,
        },
        "monotone" => InstanceSpec::Monotone {
            k: s.usize("k")?,
            spacing: s.f64("spacing")?,
            variance: s.f64("variance")?,
        },
        "equal_means" => InstanceSpec::EqualMeans {
            k: s.usize("k")?,
            variance: s.f64("variance")?,
        },
        "explicit" => {
            let means = s.vec_f64("means")?;
            let variances = match (s.opt_vec_f64("variances")?, s.opt_f64("variance")?) {
                (Some(v), None) => v,
                (None, Some(v)) => vec![v; means.len()],
                _ => return Err(cfg_err("instance.variances", "give exactly one of variances or variance")),
            };
            InstanceSpec::Explicit { means, variances, delta: s.opt_f64("delta")? }
        }
        other => {
            return Err(cfg_err(
                "instance.generator",
                format!("unknown generator `{other}`; expected slippage, monotone, equal_means or explicit"),
            ))
        }
    };
    s.finish()?;
    spec.build().map_err(|e| match e {
        rankselect_core::Error::InvalidConfig { key, reason } if !key.starts_with("instance") => CliError::Config {
            key: format!("instance.{key}"),
            reason,
        },
        other => core_err(other),
    })
}

fn parse_pool(t: &Table) -> Result<PoolSpec, CliError> {
    let mut s = Section::new("pool", t);
    let backend = match s.str("backend")? {
        "threads" => Backend::Threads,
        "simulated" => Backend::Simulated,
        other => return Err(cfg_err("pool.backend", format!("expected threads or simulated, got `{other}`"))),
    };
    let workers = s.usize("workers")?;
    let delay = s
        .opt_str("delay")?
        .map(|d| d.parse::<DelayModel>())
        .transpose()
        .map_err(core_err)?;
    let fail_job = s.opt_u64("fail_job")?;
    s.finish()?;
    let spec = PoolSpec { backend, workers, delay, fail_job };
    spec.validate().map_err(core_err)?;
    Ok(spec)
}

fn parse_procedure(t: &Table, pool: Option<PoolSpec>) -> Result<ProcedureSpec, CliError> {
    let mut s = Section::new("procedure", t);
    let name = s.str("name")?;
    let parallel = matches!(name, "aps" | "kt_plus");
    if pool.is_some() && !parallel {
        return Err(cfg_err("pool", format!("section is only used by aps and kt_plus, not `{name}`")));
    }
    let take_pool = || pool.clone().ok_or_else(|| cfg_err("pool", "missing required section"));
    let spec = match name {
        "bechhofer" => ProcedureSpec::Bechhofer {
            alpha: s.f64("alpha")?,
            delta: s.f64("delta")?,
            variance: s.opt_f64("variance")?,
        },
        "rinott" => ProcedureSpec::Rinott {
            alpha: s.f64("alpha")?,
            delta: s.f64("delta")?,
            n0: s.u64("n0")?,
        },
        "paulson" => ProcedureSpec::Paulson {
            alpha: s.f64("alpha")?,
            delta: s.f64("delta")?,
            lambda: s.f64("lambda")?,
            variance: s.opt_f64("variance")?,
            budget_cap: s.opt_u64("budget_cap")?,
        },
        "kn" => ProcedureSpec::Kn {
            alpha: s.f64("alpha")?,
            delta: s.f64("delta")?,
            n0: s.u64("n0")?,
            budget_cap: s.opt_u64("budget_cap")?,
        },
        "fhn" => ProcedureSpec::Fhn {
            alpha: s.f64("alpha")?,
            n0: s.u64("n0")?,
            budget_cap: s.opt_u64("budget_cap")?,
            variance_update: match s.opt_str("variance_update")? {
                None | Some("full") => FhnVariance::Full,
                Some("first_stage") => FhnVariance::FirstStage,
                Some(o) => {
                    return Err(cfg_err("procedure.variance_update", format!("expected full or first_stage, got `{o}`")))
                }
            },
        },
        "ocba" => ProcedureSpec::Ocba {
            budget: s.u64("budget")?,
            tau: s.u64("tau")?,
            n0: s.u64("n0")?,
        },
        "evi_ll" => ProcedureSpec::EviLl {
            budget: s.u64("budget")?,
            tau: s.u64("tau")?,
            n0: s.u64("n0")?,
        },
        "kg" => ProcedureSpec::Kg {
            budget: s.u64("budget")?,
            variance: s.opt_f64("variance")?,
            prior: match (s.opt_vec_f64("prior_means")?, s.opt_vec_f64("prior_variances")?) {
                (None, None) => KgPrior::Diffuse,
                (Some(means), Some(variances)) => KgPrior::Explicit { means, variances },
                _ => {
                    return Err(cfg_err("procedure.prior_means", "prior_means and prior_variances go together"))
                }
            },
        },
        "equal_allocation" => ProcedureSpec::EqualAllocation { budget: s.u64("budget")? },
        "aps" => ProcedureSpec::Aps {
            alpha: s.f64("alpha")?,
            delta: s.f64("delta")?,
            n0: s.u64("n0")?,
            pool: take_pool()?,
        },
        "kt_plus" => ProcedureSpec::KtPlus {
            alpha: s.f64("alpha")?,
            delta: s.f64("delta")?,
            n0: s.u64("n0")?,
            g: s.usize("g")?,
            lambda: s.opt_f64("lambda")?,
            pool: take_pool()?,
        },
        other => return Err(cfg_err("procedure.name", format!("unknown procedure `{other}`"))),
    };
    s.finish()?;
    Ok(spec)
}
