//! Subcommands and their report assembly.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use qanalytic::fock::{rep_element, vaksman_norm};
use qanalytic::freeseries::{
    free_ball_norm, free_polydisk_norm, normal_order_project, popescu_norm_lower_seeded, radius_partials,
    taylor_norm,
};
use qanalytic::jsr::{default_grid, entire_probe_grid, jsr_estimate};
use qanalytic::qspace::{ball_norm, polydisk_norm};
use qanalytic::quotient::{quotient_norm_l1, quotient_norm_l2};
use qanalytic::{AlgebraTuple, Family, FockTruncation, QParameter, SeminormSpec, SliceSet};

use crate::parse::{parse_free, parse_quantum, print_free, print_quantum};
use crate::report::{num, Item, Report};
use crate::verify::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(
    name = "qanalytic",
    version,
    about = "Quantum polydisk and quantum ball function algebras"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Polydisk,
    Ball,
    FreePolydisk,
    FreeTaylor,
    FreeBall,
    Vaksman,
    Popescu,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Polydisk => Family::Polydisk,
            FamilyArg::Ball => Family::Ball,
            FamilyArg::FreePolydisk => Family::FreePolydisk,
            FamilyArg::FreeTaylor => Family::FreeTaylor,
            FamilyArg::FreeBall => Family::FreeBall,
            FamilyArg::Vaksman => Family::Vaksman,
            FamilyArg::Popescu => Family::Popescu,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Quantum,
    Free,
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Args)]
pub struct Common {
    /// Number of variables.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Modulus of q.
    #[arg(long = "q-mod", default_value_t = 1.0)]
    pub q_mod: f64,
    /// Phase of q in radians.
    #[arg(long = "q-phase", default_value_t = 0.0, allow_negative_numbers = true)]
    pub q_phase: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Radius of the domain; `inf` for the entire algebra.
    #[arg(long, default_value = "1")]
    pub r: f64,
    /// Degree cap for parsed elements.
    #[arg(long, default_value_t = 8)]
    pub cap: usize,
    /// Total-degree cap of the Fock truncation.
    #[arg(long = "fock-cap", default_value_t = 30)]
    pub fock_cap: usize,
    /// Exponent of the joint spectral radius; `inf` allowed.
    #[arg(long, default_value = "2")]
    pub p: f64,
    #[arg(long, default_value_t = 200)]
    pub dmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "polydisk")]
    pub family: FamilyArg,
}

impl Common {
    fn q(&self) -> Result<QParameter> {
        Ok(QParameter::new(self.q_mod, self.q_phase)?)
    }

    fn spec(&self) -> Result<SeminormSpec> {
        Ok(SeminormSpec::new(self.family.into(), self.rho, self.tau, self.r)?)
    }

    fn record(&self, report: &mut Report) {
        report.param("n", Value::from(self.n));
        report.param("q_mod", num(self.q_mod));
        report.param("q_phase", num(self.q_phase));
        report.param("rho", num(self.rho));
        report.param("tau", num(self.tau));
        report.param("r", num(self.r));
        report.param("cap", Value::from(self.cap));
        report.param("fock_cap", Value::from(self.fock_cap));
        report.param("p", num(self.p));
        report.param("dmax", Value::from(self.dmax));
        report.param("seed", Value::from(self.seed));
        report.param("family", Value::from(Family::from(self.family).name()));
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norm of an element in the chosen family.
    Norm {
        expr: String,
        /// Random operator tuples tried by the Popescu lower bound.
        #[arg(long, default_value_t = 64)]
        trials: usize,
        /// Matrix size of the random tuples.
        #[arg(long = "matrix-size", default_value_t = 4)]
        matrix_size: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Product of two elements.
    Multiply {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value = "quantum")]
        mode: ModeArg,
        #[command(flatten)]
        common: Common,
    },
    /// Quotient of a free norm evaluated at a free lift.
    QuotientNorm {
        expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Joint spectral radius of the generators (or of `--tuple`).
    Jsr {
        /// Semicolon-separated tuple; defaults to the canonical generators.
        #[arg(long)]
        tuple: Option<String>,
        /// Write `rho,d,R_d` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Vaksman norm through the truncated Fock representation.
    FockNorm {
        expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Cauchy-Hadamard partials of a free element.
    Radius {
        expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Runs one verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Wall-clock budget in seconds; exceeding it yields a partial report.
        #[arg(long, default_value_t = 120.0)]
        budget: f64,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Norm { common, .. }
            | Command::Multiply { common, .. }
            | Command::QuotientNorm { common, .. }
            | Command::Jsr { common, .. }
            | Command::FockNorm { common, .. }
            | Command::Radius { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }
}

pub fn run(command: &Command) -> Result<Report> {
    match command {
        Command::Norm {
            expr,
            trials,
            matrix_size,
            common,
        } => norm(expr, *trials, *matrix_size, common),
        Command::Multiply { a, b, mode, common } => multiply(a, b, *mode, common),
        Command::QuotientNorm { expr, common } => quotient(expr, common),
        Command::Jsr { tuple, csv, common } => jsr(tuple.as_deref(), csv.as_ref(), common),
        Command::FockNorm { expr, common } => fock_norm(expr, common),
        Command::Radius { expr, common } => radius(expr, common),
        Command::Verify {
            suite,
            budget,
            common,
        } => {
            let mut report = Report::new("verify");
            common.record(&mut report);
            report.param("suite", Value::from(suite.name()));
            report.param("budget", num(*budget));
            for item in run_suite(*suite, common, *budget)? {
                report.push(item);
            }
            Ok(report)
        }
    }
}

fn norm_flags(item: Item, saturated: bool, lower: bool) -> Item {
    item.flag("saturated", saturated).flag("lower-bound", lower)
}

fn norm(expr: &str, trials: usize, m: usize, c: &Common) -> Result<Report> {
    let mut report = Report::new("norm");
    c.record(&mut report);
    report.param("expr", Value::from(expr));
    let family: Family = c.family.into();
    let item = match family {
        Family::Polydisk | Family::Ball => {
            let a = parse_quantum(expr, c.n, c.q()?, c.cap)?;
            let v = c.spec()?.norm_q(&a)?;
            norm_flags(Item::number("norm", v.value), a.is_saturated(), v.lower_bound)
        }
        Family::Vaksman => {
            let a = parse_quantum(expr, c.n, c.q()?, c.cap)?;
            let f = FockTruncation::new(c.n, c.q_mod, c.fock_cap)?;
            Item::number("norm", vaksman_norm(&a, c.rho, &f)?)
        }
        Family::FreePolydisk | Family::FreeTaylor | Family::FreeBall => {
            let a = parse_free(expr, c.n, c.cap)?;
            let v = match family {
                Family::FreePolydisk => free_polydisk_norm(&a, c.rho, c.tau),
                Family::FreeTaylor => taylor_norm(&a, c.rho),
                _ => free_ball_norm(&a, c.rho),
            };
            norm_flags(Item::number("norm", v.value), a.is_saturated(), v.lower_bound)
        }
        Family::Popescu => {
            let a = parse_free(expr, c.n, c.cap)?;
            report.param("trials", Value::from(trials));
            report.param("matrix_size", Value::from(m));
            let v = popescu_norm_lower_seeded(&a, c.rho, trials, m, c.seed)?;
            Item::number("norm", v).flag("lower-bound", true)
        }
    };
    report.push(item);
    Ok(report)
}

fn multiply(a: &str, b: &str, mode: ModeArg, c: &Common) -> Result<Report> {
    let mut report = Report::new("multiply");
    c.record(&mut report);
    report.param("a", Value::from(a));
    report.param("b", Value::from(b));
    let (text, saturated) = match mode {
        ModeArg::Quantum => {
            let q = c.q()?;
            let x = parse_quantum(a, c.n, q, c.cap)?;
            let y = parse_quantum(b, c.n, q, c.cap)?;
            let p = x.multiply(&y)?;
            (print_quantum(&p), p.is_saturated())
        }
        ModeArg::Free => {
            let x = parse_free(a, c.n, c.cap)?;
            let y = parse_free(b, c.n, c.cap)?;
            let p = x.concat_multiply(&y)?;
            (print_free(&p), p.is_saturated())
        }
    };
    report.push(Item::new("product", Value::from(text)).flag("saturated", saturated));
    Ok(report)
}

fn quotient(expr: &str, c: &Common) -> Result<Report> {
    let mut report = Report::new("quotient-norm");
    c.record(&mut report);
    report.param("expr", Value::from(expr));
    let q = c.q()?;
    let a = parse_free(expr, c.n, c.cap)?;
    if !(c.rho > 0.0 && (c.r.is_infinite() || c.rho < c.r)) {
        bail!("rho = {} must lie in (0, r) with r = {}", c.rho, c.r);
    }
    let slices = SliceSet::new(c.n, q, a.degree());
    let family: Family = c.family.into();
    let result = match family {
        Family::FreeTaylor => quotient_norm_l1(&a, c.rho, None, &slices)?,
        Family::FreePolydisk => quotient_norm_l1(&a, c.rho, Some(c.tau), &slices)?,
        Family::FreeBall => quotient_norm_l2(&a, c.rho, &slices)?,
        other => bail!("quotient-norm needs a free family, got {}", other.name()),
    };
    let image = normal_order_project(&a, q);
    let image_norm = match family {
        Family::FreeBall => ball_norm(&image, c.rho),
        _ => polydisk_norm(&image, c.rho),
    };
    report.push(
        Item::number("quotient", result.value)
            .flag("saturated", result.saturated)
            .flag("not-converged", !result.converged),
    );
    report.push(Item::number("lower-bound", result.lower_bound));
    report.push(Item::count("iterations", result.iterations));
    report.push(Item::number("residual", result.residual));
    report.push(Item::new("image", Value::from(print_quantum(&image))));
    report.push(Item::number("image-norm", image_norm.value));
    Ok(report)
}

fn jsr(tuple: Option<&str>, csv_path: Option<&PathBuf>, c: &Common) -> Result<Report> {
    let mut report = Report::new("jsr");
    c.record(&mut report);
    let family: Family = c.family.into();
    if family == Family::Vaksman {
        bail!("the jsr command supports the polydisk, ball and free families");
    }
    let q = c.q()?;
    let algebra_tuple = match (tuple, family.is_free()) {
        (None, false) => AlgebraTuple::quantum_generators(c.n, q),
        (None, true) => AlgebraTuple::free_generators(c.n),
        (Some(t), free) => {
            report.param("tuple", Value::from(t));
            let parts = t.split(';').map(str::trim);
            if free {
                AlgebraTuple::Free(
                    parts
                        .map(|e| parse_free(e, c.n, c.cap))
                        .collect::<Result<_, _>>()?,
                )
            } else {
                AlgebraTuple::Quantum(
                    parts
                        .map(|e| parse_quantum(e, c.n, q, c.cap))
                        .collect::<Result<_, _>>()?,
                )
            }
        }
    };
    let grid = if c.r.is_finite() {
        default_grid(c.r, 12)
    } else {
        entire_probe_grid()
    };
    let est = jsr_estimate(&algebra_tuple, family, c.p, c.r, c.dmax, &grid)?;
    report.push(
        Item::number("jsr", est.extrapolated)
            .flag("diverges", est.diverges)
            .flag("poor-fit", est.any_poor_fit())
            .flag("truncated", est.any_truncated()),
    );
    for (d, part) in est.diagnostics.iter().zip(&est.partials) {
        report.push(
            Item::number(format!("limit[rho={}]", d.rho), d.limit)
                .flag("poor-fit", d.poor_fit)
                .flag("truncated", part.truncated)
                .flag("non-monotone", !d.monotone),
        );
        report.push(Item::number(format!("fit-residual[rho={}]", d.rho), d.residual));
    }
    if let Some(path) = csv_path {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))?;
        w.write_record(["rho", "d", "R_d"])?;
        for part in &est.partials {
            for &(d, value) in &part.values {
                w.write_record([part.rho.to_string(), d.to_string(), value.to_string()])?;
            }
        }
        w.flush()?;
    }
    Ok(report)
}

fn fock_norm(expr: &str, c: &Common) -> Result<Report> {
    let mut report = Report::new("fock-norm");
    c.record(&mut report);
    report.param("expr", Value::from(expr));
    let a = parse_quantum(expr, c.n, c.q()?, c.cap)?;
    let f = FockTruncation::new(c.n, c.q_mod, c.fock_cap)?;
    let window = rep_element(&a, &f)?.window;
    report.push(Item::number("vaksman-norm", vaksman_norm(&a, c.rho, &f)?));
    report.push(Item::count("window", window));
    Ok(report)
}

fn radius(expr: &str, c: &Common) -> Result<Report> {
    let mut report = Report::new("radius");
    c.record(&mut report);
    report.param("expr", Value::from(expr));
    let a = parse_free(expr, c.n, c.cap)?;
    let r = radius_partials(&a, c.dmax.min(c.cap))?;
    report.push(Item::number("radius", r.estimate).flag("saturated", a.is_saturated()));
    let partials: Vec<Value> = r
        .partials
        .iter()
        .map(|&(d, v)| Value::Array(vec![Value::from(d), num(v)]))
        .collect();
    report.push(Item::new("partials", Value::Array(partials)));
    Ok(report)
}

/// Writes the report where `--json` says, or returns the text form.
pub fn emit(report: &Report, json: Option<&PathBuf>) -> Result<Option<String>> {
    match json {
        Some(p) if p.as_os_str() == "-" => Ok(Some(report.to_json() + "\n")),
        Some(p) => {
            std::fs::write(p, report.to_json() + "\n")
                .map_err(|e| anyhow!("writing {}: {e}", p.display()))?;
            Ok(Some(report.to_text()))
        }
        None => Ok(Some(report.to_text())),
    }
}
