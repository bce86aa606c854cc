//! Netlist and search-target file formats (TOML) plus bias-angle parsing.

use anyhow::{bail, Context, Result};
use circuitq::evolve::{Bounds, EvolveConfig, FitnessSpec, WeightedTarget};
use circuitq::netlist::{Branch, CircuitNetlist};
use circuitq::quantize::QuantizeOptions;
use serde::Deserialize;
use std::path::Path;

/// Parse an angle in radians with a `pi` suffix convention: `pi`, `-pi`,
/// `0.9pi`, or a plain number in radians.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Some(head) = t.strip_suffix("pi") {
        let factor = match head.trim() {
            "" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().with_context(|| format!("bad angle `{s}`"))?,
        };
        return Ok(factor * std::f64::consts::PI);
    }
    t.parse::<f64>().with_context(|| format!("bad angle `{s}`"))
}

/// Parse a `lo:hi:n` grid specification; `lo` and `hi` accept the angle
/// syntax of [`parse_angle`].
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("grid `{s}` must be lo:hi:n");
    }
    let lo = parse_angle(parts[0])?;
    let hi = parse_angle(parts[1])?;
    let n: usize = parts[2].parse().with_context(|| format!("bad grid count in `{s}`"))?;
    if n < 2 {
        bail!("grid `{s}` needs at least 2 points");
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

/// Comma-separated float list.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number `{p}`")))
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchFile {
    from: usize,
    to: usize,
    /// Capacitance, fF.
    c: f64,
    /// Inductance, nH.
    l: Option<f64>,
    /// Josephson energy, GHz.
    ej: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BiasFile {
    ng: Option<f64>,
    phi: Option<toml::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetlistFile {
    nodes: usize,
    #[serde(default)]
    reference: usize,
    #[serde(default)]
    closure: Vec<usize>,
    #[serde(rename = "branch")]
    branches: Vec<BranchFile>,
    bias: Option<BiasFile>,
}

/// Netlist plus the default bias point stored alongside it.
#[derive(Debug, Clone)]
pub struct LoadedNetlist {
    pub netlist: CircuitNetlist,
    pub ng: f64,
    pub phi: f64,
}

/// Load and validate a netlist file.
pub fn load_netlist(path: &Path) -> Result<LoadedNetlist> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read netlist {}", path.display()))?;
    let file: NetlistFile = toml::from_str(&text)
        .with_context(|| format!("cannot parse netlist {}", path.display()))?;

    let branches = file
        .branches
        .into_iter()
        .map(|b| {
            let mut br = Branch::capacitive(b.from, b.to, b.c);
            if let Some(l) = b.l {
                br = br.with_inductor(l);
            }
            if let Some(ej) = b.ej {
                br = br.with_junction(ej);
            }
            br
        })
        .collect();
    let netlist = CircuitNetlist {
        n_nodes: file.nodes,
        reference: file.reference,
        branches,
        closure: file.closure,
    };
    netlist.validate().with_context(|| format!("invalid netlist {}", path.display()))?;

    let (mut ng, mut phi) = (0.0, 0.0);
    if let Some(bias) = file.bias {
        ng = bias.ng.unwrap_or(0.0);
        phi = match bias.phi {
            None => 0.0,
            Some(toml::Value::String(s)) => parse_angle(&s)?,
            Some(toml::Value::Float(v)) => v,
            Some(toml::Value::Integer(v)) => v as f64,
            Some(other) => bail!("bias phi must be a number or angle string, got {other}"),
        };
    }
    Ok(LoadedNetlist { netlist, ng, phi })
}

/// Serialize a netlist in the same TOML dialect [`load_netlist`] reads.
pub fn netlist_to_toml(net: &CircuitNetlist) -> String {
    let mut out = String::new();
    out.push_str(&format!("nodes = {}\nreference = {}\n", net.n_nodes, net.reference));
    if !net.closure.is_empty() {
        let idx: Vec<String> = net.closure.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("closure = [{}]\n", idx.join(", ")));
    }
    for b in &net.branches {
        out.push_str(&format!("\n[[branch]]\nfrom = {}\nto = {}\nc = {}\n", b.from, b.to, b.c_ff));
        if let Some(l) = b.l_nh {
            out.push_str(&format!("l = {l}\n"));
        }
        if let Some(ej) = b.e_j_ghz {
            out.push_str(&format!("ej = {ej}\n"));
        }
    }
    out
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchFile {
    n_islands: usize,
    population: usize,
    generations: usize,
    mutation_probability: f64,
    n_cull: usize,
    #[serde(default = "default_retry")]
    retry_budget: usize,
}

fn default_retry() -> usize {
    64
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    c: Option<[f64; 2]>,
    l: Option<[f64; 2]>,
    ej: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    target: f64,
    #[serde(default = "default_weight")]
    weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitnessFile {
    omega01: Option<TargetFile>,
    anharmonicity: Option<TargetFile>,
    drive_element: Option<TargetFile>,
    #[serde(default)]
    flux_dispersion_weight: f64,
    #[serde(default)]
    charge_dispersion_weight: f64,
    mode_count: Option<usize>,
    ng: Option<f64>,
    phi: Option<toml::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolveFile {
    search: SearchFile,
    #[serde(default)]
    bounds: Option<BoundsFile>,
    fitness: FitnessFile,
}

/// Load an evolutionary-search target file. The seed and quantization
/// cutoffs come from the command line so the file stays shareable.
pub fn load_evolve_config(
    path: &Path,
    seed: u64,
    quantize: QuantizeOptions,
    tol: f64,
) -> Result<(EvolveConfig, FitnessSpec)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read targets {}", path.display()))?;
    let file: EvolveFile = toml::from_str(&text)
        .with_context(|| format!("cannot parse targets {}", path.display()))?;

    let mut bounds = Bounds::default();
    if let Some(b) = file.bounds {
        if let Some([lo, hi]) = b.c {
            bounds.c_ff = (lo, hi);
        }
        if let Some([lo, hi]) = b.l {
            bounds.l_nh = (lo, hi);
        }
        if let Some([lo, hi]) = b.ej {
            bounds.e_j_ghz = (lo, hi);
        }
    }
    let config = EvolveConfig {
        n_islands: file.search.n_islands,
        population: file.search.population,
        generations: file.search.generations,
        mutation_probability: file.search.mutation_probability,
        n_cull: file.search.n_cull,
        retry_budget: file.search.retry_budget,
        seed,
        bounds,
    };

    let as_target = |t: &TargetFile| WeightedTarget { target: t.target, weight: t.weight };
    let phi = match file.fitness.phi {
        None => 0.0,
        Some(toml::Value::String(ref s)) => parse_angle(s)?,
        Some(toml::Value::Float(v)) => v,
        Some(toml::Value::Integer(v)) => v as f64,
        Some(ref other) => bail!("fitness phi must be a number or angle string, got {other}"),
    };
    let fitness = FitnessSpec {
        omega_01: file.fitness.omega01.as_ref().map(as_target),
        anharmonicity: file.fitness.anharmonicity.as_ref().map(as_target),
        drive_element: file.fitness.drive_element.as_ref().map(as_target),
        flux_dispersion_weight: file.fitness.flux_dispersion_weight,
        charge_dispersion_weight: file.fitness.charge_dispersion_weight,
        mode_count: file.fitness.mode_count,
        ng_ext: file.fitness.ng.unwrap_or(0.0),
        phi_ext: phi,
        quantize,
        tol,
    };
    Ok((config, fitness))
}
