use std::path::Path;

use ecd_core::bounds::{self, BoundInputs, BoundValue, Fhat, GRID_FLOOR};
use ecd_core::ecd::{
    diamond_norm_estimate, ecd_norm_estimate, q_n, truncation_norm_bound, EcdEstimate, EcdOptions, EcdProblem,
};
use ecd_core::experiments;
use ecd_core::info::{
    energy_gain, holevo_capacity_estimate, holevo_chi, holevo_chi_divergence, qmi, qmi_divergence, CapacityOptions,
};
use ecd_core::io;
use ecd_core::operator::{Hamiltonian, HermitianPreservingMap};
use ecd_core::thermo::{f_h, gibbs_lambda, FhatOscillator};
use ecd_core::zoo::{self, TruncatedOscillator};
use ecd_core::{Error, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::report::{Body, Document};

pub enum Output {
    Document(Document),
    /// A channel or Hamiltonian file, emitted verbatim.
    File(String),
}

pub fn run(cli: &Cli) -> Result<Output> {
    let seed = cli.seed;
    let (params, body) = match &cli.command {
        Command::EcdNorm(a) => (params(a), ecd_norm(a, seed)?),
        Command::Diamond(a) => (params(a), diamond(a, seed)?),
        Command::Qn(a) => (params(a), qn(a, seed)?),
        Command::Gibbs(a) => (params(a), gibbs(a)?),
        Command::Fbound(a) => (params(a), fbound(a)?),
        Command::Chi(a) => (params(a), chi(a)?),
        Command::Qmi(a) => (params(a), mutual_information(a)?),
        Command::CapEst(a) => (params(a), cap_est(a, seed)?),
        Command::EnergyGain(a) => (params(a), gain(a)?),
        Command::Bound(a) => (params(a), bound(a)?),
        Command::OptimizeT(a) => (params(a), optimize(&a.common)?),
        Command::Zoo(z) => return zoo_file(z).map(Output::File),
        Command::Experiment(e) => experiment(e, seed)?,
    };
    Ok(Output::Document(Document {
        command: cli.command.name().to_string(),
        seed,
        params,
        body,
    }))
}

fn params<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments always serialize")
}

fn record(value: Value) -> Body {
    match value {
        Value::Object(m) => Body::Record(m),
        _ => unreachable!("records are built from objects"),
    }
}

fn load_theta(src: &MapSource) -> Result<HermitianPreservingMap> {
    if let Some(path) = &src.map {
        return io::load_map(path);
    }
    let phi = io::load_channel(src.phi.as_deref().expect("clap requires --map or --phi"))?;
    match &src.psi {
        Some(path) => HermitianPreservingMap::difference(&phi, &io::load_channel(path)?),
        None => Ok(HermitianPreservingMap::from_channel(&phi)),
    }
}

fn oscillator(levels: usize, hbar_omega: f64) -> Result<Hamiltonian> {
    Ok(TruncatedOscillator::new(levels, hbar_omega)?.hamiltonian().clone())
}

fn load_hamiltonian(src: &HamiltonianSource, dim: Option<usize>) -> Result<Hamiltonian> {
    if let Some(path) = &src.hamiltonian {
        return io::load_hamiltonian(path);
    }
    let levels = src
        .levels
        .or(dim)
        .ok_or_else(|| Error::Domain("give --hamiltonian or --levels".into()))?;
    oscillator(levels, src.hbar_omega)
}

fn ecd_options(search: &SearchArgs, seed: u64) -> EcdOptions {
    EcdOptions {
        restarts: search.restarts,
        seed,
        max_iter: search.max_iter,
    }
}

fn estimate_json(est: &EcdEstimate, with_witness: bool) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("lower".into(), json!(est.lower));
    m.insert("upper".into(), json!(est.upper));
    m.insert("r_dim".into(), json!(est.r_dim));
    m.insert("witness_energy".into(), json!(est.witness_energy));
    if with_witness {
        let w: Vec<[f64; 2]> = est.witness.iter().map(|z| [z.re, z.im]).collect();
        m.insert("witness".into(), json!(w));
    }
    m
}

fn ecd_norm(a: &EcdArgs, seed: u64) -> Result<Body> {
    let map = load_theta(&a.theta)?;
    let h = load_hamiltonian(&a.hamiltonian, Some(map.in_dim()))?;
    let r_dim = a.r_dim.unwrap_or(map.in_dim());
    let problem = EcdProblem::with_reference(map, h, a.energy, r_dim)?;
    let est = ecd_norm_estimate(&problem, &ecd_options(&a.search, seed))?;
    Ok(Body::Record(estimate_json(&est, a.witness)))
}

fn diamond(a: &DiamondArgs, seed: u64) -> Result<Body> {
    let map = load_theta(&a.theta)?;
    let est = diamond_norm_estimate(&map, a.r_dim, &ecd_options(&a.search, seed))?;
    Ok(Body::Record(estimate_json(&est, false)))
}

fn qn(a: &QnArgs, seed: u64) -> Result<Body> {
    let map = load_theta(&a.theta)?;
    let h = load_hamiltonian(&a.hamiltonian, Some(map.in_dim()))?;
    let options = ecd_options(&a.search, seed);
    let Some(e) = a.energy else {
        return Ok(Body::Record(estimate_json(&q_n(&map, &h, a.n, &options)?, false)));
    };
    let b = truncation_norm_bound(&map, &h, e, a.n, &options)?;
    let mut m = estimate_json(&b.q_n, false);
    m.insert("level_energy".into(), json!(b.level_energy));
    m.insert("tail".into(), json!(b.tail));
    m.insert("estimate".into(), json!(b.estimate));
    m.insert("bound".into(), json!(b.bound));
    Ok(Body::Record(m))
}

fn gibbs(a: &GibbsArgs) -> Result<Body> {
    let h = load_hamiltonian(&a.hamiltonian, None)?;
    let sol = gibbs_lambda(&h, a.energy)?;
    Ok(record(json!({
        "lambda": sol.lambda,
        "mean_energy": sol.mean_energy,
        "entropy": sol.entropy,
        "f_h": f_h(&h, a.energy)?,
    })))
}

/// `osc:ℓ:ω` (ℓ equal modes), `osc:ℓ:ω₁:…:ω_ℓ`, `shifted:<file>` or
/// `table:<file>`.
pub fn parse_fhat(spec: &str) -> Result<Fhat> {
    let (head, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("F̂ selector {spec:?} has no ':'")))?;
    match head {
        "osc" => {
            let fields: Vec<&str> = rest.split(':').collect();
            let number = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {s:?} in {spec:?}")))
            };
            let modes: usize = fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad mode count in {spec:?}")))?;
            let freqs = fields[1..].iter().map(|s| number(s)).collect::<Result<Vec<_>>>()?;
            let osc = match freqs.len() {
                1 => FhatOscillator::uniform(modes, freqs[0])?,
                n if n == modes => FhatOscillator::new(freqs)?,
                n => return Err(Error::Parse(format!("{spec:?}: {n} frequencies for {modes} modes"))),
            };
            Ok(Fhat::Oscillator(osc))
        }
        "shifted" => Ok(Fhat::Shifted(io::load_hamiltonian(Path::new(rest))?)),
        "table" => Ok(Fhat::Table(io::load_fhat_table(Path::new(rest))?)),
        _ => Err(Error::Parse(format!(
            "F̂ selector {spec:?} is not osc:…, shifted:… or table:…"
        ))),
    }
}

fn fbound(a: &FboundArgs) -> Result<Body> {
    let (value, valid_below) = parse_fhat(&a.fhat)?.eval(a.energy)?;
    Ok(record(json!({ "value": value, "valid_below": valid_below })))
}

fn chi(a: &ChiArgs) -> Result<Body> {
    let mut ensemble = io::load_ensemble(&a.ensemble)?;
    if let Some(path) = &a.channel {
        ensemble = ensemble.through(&io::load_channel(path)?)?;
    }
    Ok(record(json!({
        "chi": holevo_chi(&ensemble),
        "chi_divergence": holevo_chi_divergence(&ensemble),
        "members": ensemble.len(),
    })))
}

fn mutual_information(a: &QmiArgs) -> Result<Body> {
    let &[d1, d2] = a.dims.as_slice() else {
        return Err(Error::Domain(format!("--dims needs two values, got {:?}", a.dims)));
    };
    let rho = io::load_state(&a.state)?;
    let dims = (d1, d2);
    Ok(record(json!({
        "qmi": qmi(&rho, dims)?,
        "qmi_divergence": qmi_divergence(&rho, dims)?,
    })))
}

fn cap_est(a: &CapArgs, seed: u64) -> Result<Body> {
    let channel = io::load_channel(&a.channel)?;
    let h = load_hamiltonian(&a.hamiltonian, Some(channel.in_dim()))?;
    let mut options = CapacityOptions::for_input_dim(channel.in_dim());
    options.ensemble_size = a.ensemble_size.unwrap_or(options.ensemble_size);
    options.restarts = a.restarts;
    options.max_iter = a.max_iter;
    options.seed = seed;
    let est = holevo_capacity_estimate(&channel, &h, a.energy, &options)?;
    Ok(record(json!({
        "value": est.value,
        "average_energy": est.average_energy,
        "members": est.ensemble.len(),
        "probs": est.ensemble.probs(),
    })))
}

fn gain(a: &GainArgs) -> Result<Body> {
    let channel = io::load_channel(&a.channel)?;
    let h_in = match &a.h_in {
        Some(p) => io::load_hamiltonian(p)?,
        None => oscillator(channel.in_dim(), a.hbar_omega)?,
    };
    let h_out = match &a.h_out {
        Some(p) => io::load_hamiltonian(p)?,
        None => oscillator(channel.out_dim(), a.hbar_omega)?,
    };
    let g = energy_gain(&channel, &h_in, &h_out, a.energy)?;
    Ok(record(json!({
        "k": g.k,
        "max_output_energy": g.max_output_energy,
        "mu": g.mu,
        "primal": g.primal,
    })))
}

fn bound_inputs(c: &BoundCommon, t: f64) -> Result<BoundInputs> {
    let mut inputs = BoundInputs::new(c.eps, c.energy, t, parse_fhat(&c.fhat)?);
    inputs.k = c.k;
    inputs.n = c.n;
    inputs.specialized = c.specialized;
    Ok(inputs)
}

pub fn bound_json(v: &BoundValue) -> Value {
    json!({
        "total": v.total,
        "main_term": v.main_term,
        "g_term": v.g_term,
        "h2_term": v.h2_term,
        "t_used": v.t_used,
        "fhat_arg": v.fhat_arg,
        "fhat_valid_below": v.fhat_valid_below,
    })
}

fn bound(a: &BoundArgs) -> Result<Body> {
    if a.optimize_t {
        return optimize(&a.common);
    }
    if let Some(t) = a.t {
        return Ok(record(bound_json(&bounds::bound(
            a.common.kind,
            &bound_inputs(&a.common, t)?,
        )?)));
    }
    let count = a.sweep.expect("clap requires one of --t, --optimize-t, --sweep");
    let inputs = bound_inputs(&a.common, 1.0)?;
    let t_max = inputs.t_max();
    let ts = bounds::log_grid(GRID_FLOOR * t_max, t_max, count);
    let values = bounds::sweep(a.common.kind, &inputs, &ts)?;
    Ok(Body::Table(experiments::Table {
        columns: ["t", "total", "main", "g", "h2"].map(String::from).to_vec(),
        rows: values
            .iter()
            .map(|v| vec![v.t_used, v.total, v.main_term, v.g_term, v.h2_term])
            .collect(),
    }))
}

fn optimize(c: &BoundCommon) -> Result<Body> {
    let best = bounds::optimize_t(c.kind, &bound_inputs(c, 1.0)?)?;
    Ok(record(bound_json(&best)))
}

fn zoo_file(z: &ZooCommand) -> Result<String> {
    let channel = match *z {
        ZooCommand::Identity { d } => zoo::identity_channel(d)?,
        ZooCommand::Depolarize { d, p } => {
            let ground = ecd_core::operator::DensityOperator::basis(d, 0);
            zoo::depolarize_to(&ground, p)?
        }
        ZooCommand::Dephasing { d, p } => zoo::dephasing(d, p)?,
        ZooCommand::PhaseRotation { d, theta } => zoo::phase_rotation(d, theta)?,
        ZooCommand::Attenuator { d, eta } => zoo::attenuator(d, eta)?,
        ZooCommand::Oscillator { d, hbar_omega } => {
            return Ok(io::hamiltonian_to_json(&oscillator(d, hbar_omega)?) + "\n")
        }
    };
    Ok(io::channel_to_json(&channel) + "\n")
}

fn experiment(e: &ExperimentCommand, seed: u64) -> Result<(Value, Body)> {
    let (params, table) = match e {
        ExperimentCommand::StrongConvergence(a) => (
            params(a),
            experiments::strong_convergence(a.d, a.energy, &a.thetas, &ecd_options(&a.search, seed))?,
        ),
        ExperimentCommand::AttenuatorPair(a) => (
            params(a),
            experiments::attenuator_pair(a.eta1, a.eta2, &a.dims, a.energy, &ecd_options(&a.search, seed))?,
        ),
        ExperimentCommand::TightnessCchi(a) => {
            let mut options = CapacityOptions::for_input_dim(a.d);
            options.ensemble_size = a.ensemble_size.unwrap_or(options.ensemble_size);
            options.restarts = a.restarts;
            options.max_iter = a.max_iter;
            options.seed = seed;
            (
                params(a),
                experiments::tightness_cchi(a.d, a.hbar_omega, &a.energies, &options)?,
            )
        }
        ExperimentCommand::TightnessEa(a) => (params(a), experiments::tightness_ea(a.d, a.hbar_omega, &a.energies)?),
        ExperimentCommand::TruncationLadder(a) => (
            params(a),
            experiments::truncation_ladder(a.eta1, a.eta2, a.d, a.energy, &a.ns, &ecd_options(&a.search, seed))?,
        ),
    };
    Ok((params, Body::Table(table)))
}
