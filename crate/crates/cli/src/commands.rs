use std::fs::File;
use std::path::Path;

use levysig::levy::expected_signature;
use levysig::market::{map_paths, simulate_primary_indexed};
use levysig::signature::terminal_signature;
use levysig::tensor::{all_words, WordCombination};
use levysig::valuation::{fit_path_functional, hedge_pnl_mc, hedge_strategy, mc_price, price_sig_payoff, simulate_market, DegeneracyPolicy, McEstimate};
use serde_json::{json, Value};

use crate::config::Config;
use crate::{CliError, Command, CommonArgs};

pub fn dispatch(command: Command, cfg: &Config, args: &CommonArgs) -> Result<Value, CliError> {
    match command {
        Command::ExpectedSig => expected_sig(cfg, args),
        Command::Price => price(cfg, args),
        Command::Hedge => hedge(cfg, args),
        Command::Simulate => simulate(cfg, args),
        Command::Fit => fit(cfg, args),
    }
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<File>, CliError> {
    Ok(csv::Writer::from_path(dir.join(name))?)
}

fn expected_sig(cfg: &Config, args: &CommonArgs) -> Result<Value, CliError> {
    let triplet = cfg.triplet_for_expectation()?;
    let sim = cfg.simulation()?;
    let level = cfg.market.as_ref().map_or(3, |m| m.trunc_level);
    let analytic = expected_signature(&triplet, sim.horizon, level)?;
    let words = all_words(triplet.alphabet(), level);

    // Monte Carlo only for the primary process, which is the one the simulator handles.
    let mc: Option<Vec<McEstimate>> = if sim.paths > 0 && triplet.primary_atoms().is_some() {
        let grid = cfg.grid(args.seed_override)?;
        let sigs = map_paths(sim.paths, |i| terminal_signature(&simulate_primary_indexed(&triplet, &grid, i)?, level))?;
        let per_word = words
            .iter()
            .map(|w| {
                let samples = sigs.iter().map(|s| s.coefficient(w)).collect::<levysig::Result<Vec<_>>>()?;
                Ok(McEstimate::from_samples(&samples))
            })
            .collect::<Result<_, CliError>>()?;
        Some(per_word)
    } else {
        None
    };

    let mut out = csv_writer(&args.out_dir, "expected_signature.csv")?;
    out.write_record(["word", "analytic", "mc_mean", "mc_se"])?;
    let mut outside = 0;
    for (i, w) in words.iter().enumerate() {
        let a = analytic.coefficient(w)?;
        let (m, se) = match &mc {
            Some(est) => {
                if !est[i].within(a, 3.0) && (est[i].mean - a).abs() > 1e-12 {
                    outside += 1;
                }
                (est[i].mean.to_string(), est[i].std_error.to_string())
            }
            None => (String::new(), String::new()),
        };
        out.write_record([w.to_string(), a.to_string(), m, se])?;
    }
    out.flush()?;
    Ok(json!({
        "command": "expected-sig",
        "words": words.len(),
        "level": level,
        "horizon": sim.horizon,
        "mc_paths": mc.as_ref().map_or(0, |_| sim.paths),
        "words_outside_3se": mc.as_ref().map(|_| outside),
        "output": args.out_dir.join("expected_signature.csv"),
    }))
}

fn price(cfg: &Config, args: &CommonArgs) -> Result<Value, CliError> {
    let params = cfg.model()?;
    let triplet = cfg.primary_triplet()?;
    let grid = cfg.grid(args.seed_override)?;
    let paths = cfg.simulation()?.paths;
    let mut out = csv_writer(&args.out_dir, "price_report.csv")?;
    out.write_record(["payoff", "analytic", "mc_mean", "mc_se"])?;
    let mut rows = Vec::new();
    for (id, payoff) in cfg.payoffs()?.iter().enumerate() {
        let analytic = price_sig_payoff(payoff, &params, &triplet, grid.horizon())?;
        let mc = (paths > 0).then(|| mc_price(payoff, &params, &triplet, &grid, paths)).transpose()?;
        out.write_record([
            id.to_string(),
            analytic.to_string(),
            mc.map_or(String::new(), |m| m.mean.to_string()),
            mc.map_or(String::new(), |m| m.std_error.to_string()),
        ])?;
        rows.push(json!({
            "payoff": payoff.terms().to_string(),
            "analytic": analytic,
            "mc_mean": mc.map(|m| m.mean),
            "mc_se": mc.map(|m| m.std_error),
        }));
    }
    out.flush()?;
    Ok(json!({ "command": "price", "paths": paths, "prices": rows, "output": args.out_dir.join("price_report.csv") }))
}

fn hedge(cfg: &Config, args: &CommonArgs) -> Result<Value, CliError> {
    let params = cfg.model()?;
    let triplet = cfg.primary_triplet()?;
    let grid = cfg.grid(args.seed_override)?;
    let payoff = cfg.payoffs()?.swap_remove(0);
    let policy = if cfg.task.strict_hedge { DegeneracyPolicy::Fail } else { DegeneracyPolicy::ZeroPosition };
    let primary = simulate_primary_indexed(&triplet, &grid, cfg.task.hedge_path)?;
    let report = hedge_strategy(&payoff, &params, &triplet, &primary, policy)?;

    let mut out = csv_writer(&args.out_dir, "hedge_report.csv")?;
    out.write_record(["time", "theta", "price", "price_left"])?;
    for k in 0..report.times.len() {
        out.write_record([
            report.times[k].to_string(),
            report.theta_path[k].to_string(),
            report.price_path[k].to_string(),
            report.price_left[k].to_string(),
        ])?;
    }
    out.flush()?;

    let paths = cfg.simulation()?.paths;
    let pnl = (paths > 0).then(|| hedge_pnl_mc(&payoff, &params, &triplet, &grid, paths, policy)).transpose()?;
    Ok(json!({
        "command": "hedge",
        "payoff": payoff.terms().to_string(),
        "path_index": cfg.task.hedge_path,
        "initial_capital": report.v_star,
        "payoff_value": report.payoff,
        "gains": report.gains,
        "hedging_error": report.payoff - report.v_star - report.gains,
        "denominator_floor_hits": report.denominator_floor_hits,
        "mc_paths": paths,
        "unhedged_variance": pnl.map(|p| p.unhedged_variance),
        "hedged_variance": pnl.map(|p| p.hedged_variance),
        "mean_hedging_error": pnl.map(|p| p.mean_hedging_error),
        "output": args.out_dir.join("hedge_report.csv"),
    }))
}

fn simulate(cfg: &Config, args: &CommonArgs) -> Result<Value, CliError> {
    let params = cfg.model()?;
    let triplet = cfg.primary_triplet()?;
    let grid = cfg.grid(args.seed_override)?;
    let count = cfg.task.simulate_paths.unwrap_or_else(|| cfg.simulation().map_or(1, |s| s.paths.min(10)).max(1));
    let markets = map_paths(count, |i| simulate_market(&params, &triplet, &grid, i, 1))?;
    let mut terminal = Vec::with_capacity(count);
    for (i, m) in markets.iter().enumerate() {
        m.primary.write_csv(File::create(args.out_dir.join(format!("primary_{i:04}.csv")))?)?;
        m.model.write_csv(File::create(args.out_dir.join(format!("model_{i:04}.csv")))?)?;
        terminal.push(m.model.value(m.model.len() - 1)[1]);
    }
    Ok(json!({ "command": "simulate", "paths": count, "seed": grid.seed(), "terminal_prices": terminal, "output": args.out_dir }))
}

/// Path-dependent targets understood by `fit`.
enum FitTarget {
    RunningMax,
    TerminalPrice,
    Functional(WordCombination),
}

impl FitTarget {
    fn parse(text: &str) -> Result<Self, CliError> {
        Ok(match text {
            "running_max" => Self::RunningMax,
            "terminal_price" => Self::TerminalPrice,
            other => Self::Functional(other.parse()?),
        })
    }

    fn evaluate(&self, model: &levysig::path::CadlagSamplePath) -> Result<f64, CliError> {
        let prices = (0..model.len()).map(|k| model.value(k)[1]);
        Ok(match self {
            Self::RunningMax => prices.fold(f64::NEG_INFINITY, f64::max),
            Self::TerminalPrice => prices.last().unwrap_or(0.0),
            Self::Functional(f) => f.eval(&terminal_signature(model, f.max_word_len().max(1))?)?,
        })
    }
}

fn fit(cfg: &Config, args: &CommonArgs) -> Result<Value, CliError> {
    let params = cfg.model()?;
    let triplet = cfg.primary_triplet()?;
    let grid = cfg.grid(args.seed_override)?;
    let paths = cfg.simulation()?.paths;
    if paths == 0 {
        return Err(CliError::Config("fit needs [simulation] paths > 0".into()));
    }
    let level = cfg.task.fit_level.unwrap_or(3);
    let target = FitTarget::parse(cfg.task.fit_target.as_deref().unwrap_or("running_max"))?;
    let models: Vec<_> = map_paths(paths, |i| Ok(simulate_market(&params, &triplet, &grid, i, 1)?.model))?;
    let targets = models.iter().map(|m| target.evaluate(m)).collect::<Result<Vec<_>, _>>()?;
    let result = fit_path_functional(&models, &targets, level)?;

    let mut out = csv_writer(&args.out_dir, "fit_report.csv")?;
    out.write_record(["word", "coefficient"])?;
    for (w, c) in result.functional.iter() {
        out.write_record([w.to_string(), c.to_string()])?;
    }
    out.flush()?;
    Ok(json!({
        "command": "fit",
        "paths": paths,
        "level": level,
        "rms_residual": result.residual,
        "underdetermined": result.underdetermined,
        "output": args.out_dir.join("fit_report.csv"),
    }))
}
