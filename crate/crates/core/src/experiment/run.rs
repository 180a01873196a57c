//! One driver per subcommand.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::output::{Cell, PlotSeries, RunOutput, Table};
use super::{CommandKind, ExperimentConfig, Model, Observable, OrderKind, Plan};
use crate::countable::{
    gurevich_from_table, renewal_potential, renewal_pressure_root, sgp_example_potential,
    truncated_representation_check, CountablePotential, CountableShift,
};
use crate::error::{Error, Result};
use crate::potential::{dyson_potential, walters_check, TailGrid};
use crate::renewal::{Hofbauer, RenewalObservable};
use crate::spectral::{
    commutator_norm, dixmier_trajectory, eigenvalue_stream, representation_prediction, StreamLimit, StreamOrder,
    TripleConfig,
};
use crate::symbolic::TailPoint;
use crate::zeta::{
    branch_difference_bound, default_s_grid, residue, walters_pipeline, PipelineOptions, ZetaSetup,
    DEFAULT_EXTRAPOLATION_ORDER,
};

/// Periodic-orbit horizon of the Gurevich sums.
const GUREVICH_HORIZON: usize = 400;

/// Validates `config` and runs its command. Deterministic for a fixed config.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let plan = config.validate()?;
    let mut out = RunOutput {
        command: plan.command.name().to_string(),
        tables: Vec::new(),
        summary: BTreeMap::new(),
        error_bounds: BTreeMap::new(),
    };
    match plan.command {
        CommandKind::Verify => stream_run(&plan, StreamOrder::DecreasingWeight, &mut out)?,
        CommandKind::Dixmier => {
            let order = match plan.order {
                OrderKind::Paper => StreamOrder::Paper,
                OrderKind::Decreasing => StreamOrder::DecreasingWeight,
            };
            stream_run(&plan, order, &mut out)?
        }
        CommandKind::Zeta => zeta_run(&plan, &mut out)?,
        CommandKind::Hofbauer => hofbauer_run(&plan, &mut out)?,
        CommandKind::Dyson => dyson_run(&plan, &mut out)?,
        CommandKind::Gurevich => gurevich_run(&plan, &mut out)?,
        CommandKind::CountableVerify => countable_run(&plan, &mut out)?,
        CommandKind::Regularity => regularity_run(&plan, &mut out)?,
    }
    Ok(out)
}

fn largest_truncation(plan: &Plan) -> usize {
    plan.truncations.iter().copied().max().unwrap_or(32)
}

fn triple(plan: &Plan) -> Result<TripleConfig> {
    let g = plan.model.g_function(plan.depth, largest_truncation(plan))?;
    let cfg = TripleConfig::with_defaults(g)?;
    TripleConfig::new(cfg.g.clone(), plan.x.clone(), plan.y.clone(), plan.alpha_metric.unwrap_or(cfg.alpha_metric))
}

fn stream_run(plan: &Plan, order: StreamOrder, out: &mut RunOutput) -> Result<()> {
    let cfg = triple(plan)?;
    let a = plan.observable.potential(cfg.alphabet())?;
    let stream = eigenvalue_stream(a.as_ref(), &cfg, 1.0, StreamLimit::Entries(plan.n), order);
    let trajectory = dixmier_trajectory(&stream)?;
    let prediction = representation_prediction(a.as_ref(), &cfg, a.depth().unwrap_or(plan.depth))?;

    let mut t = Table::new("dixmier", &["n_terms", "log_n", "log_average", "estimate", "tail_proxy"]);
    for e in &trajectory {
        t.push(vec![
            e.n_terms.into(),
            (e.n_terms as f64).ln().into(),
            e.log_average.into(),
            e.value.into(),
            e.tail_proxy.into(),
        ]);
    }
    out.tables.push(t);
    let last = trajectory.last().ok_or_else(|| Error::Domain("stream shorter than four entries".into()))?;
    let gap = (last.value - prediction.value).abs();
    out.summary.insert("n_terms".into(), last.n_terms as f64);
    out.summary.insert("estimate".into(), last.value);
    out.summary.insert("log_average".into(), last.log_average);
    out.summary.insert("predicted".into(), prediction.value);
    out.summary.insert("entropy".into(), prediction.entropy);
    out.summary.insert("integral".into(), prediction.integral.value);
    out.summary.insert("abs_gap".into(), gap);
    out.summary.insert("rel_gap".into(), if prediction.value != 0.0 { gap / prediction.value.abs() } else { gap });
    out.error_bounds.insert("predicted".into(), prediction.abs_error);
    out.error_bounds.insert("estimate_tail_proxy".into(), last.tail_proxy);
    Ok(())
}

fn zeta_run(plan: &Plan, out: &mut RunOutput) -> Result<()> {
    let cfg = triple(plan)?;
    let a = plan.observable.local(cfg.alphabet(), plan.depth)?;
    let setup = ZetaSetup::new(cfg.g.clone(), a.clone(), plan.x.clone(), plan.y.clone(), a.depth())?;
    let plus = residue(&setup, false, &plan.s_grid, DEFAULT_EXTRAPOLATION_ORDER)?;
    let minus = residue(&setup, true, &plan.s_grid, DEFAULT_EXTRAPOLATION_ORDER)?;
    let bound = branch_difference_bound(&a, 1.0, &plan.x, &plan.y);

    let mut t = Table::new(
        "zeta",
        &["s", "plus_times_s_minus_1", "minus_times_s_minus_1", "branch_difference", "branch_bound"],
    );
    for (i, &s) in plan.s_grid.iter().enumerate() {
        let diff = (plus.products[i] - minus.products[i]).abs() / (s - 1.0);
        t.push(vec![s.into(), plus.products[i].into(), minus.products[i].into(), diff.into(), bound.into()]);
    }
    out.tables.push(t);

    let prediction = representation_prediction(&a, &cfg, a.depth())?;
    out.summary.insert("limit_plus".into(), plus.limit);
    out.summary.insert("limit_minus".into(), minus.limit);
    out.summary.insert("limit_difference".into(), (plus.limit - minus.limit).abs());
    out.summary.insert("predicted".into(), 0.5 * prediction.value);
    out.summary.insert("entropy".into(), prediction.entropy);
    out.error_bounds.insert("limit_plus_residual".into(), plus.residual);
    out.error_bounds.insert("limit_minus_residual".into(), minus.residual);
    out.error_bounds.insert("branch_bound".into(), bound);
    Ok(())
}

fn hofbauer_run(plan: &Plan, out: &mut RunOutput) -> Result<()> {
    let Model::Hofbauer { gamma } = plan.model else { unreachable!("validated") };
    let h = if gamma > 2.0 { Hofbauer::new(gamma)? } else { Hofbauer::with_low_gamma(gamma)? };
    let rows: Vec<Result<Vec<Cell>>> = plan
        .s_grid
        .par_iter()
        .map(|&s| {
            let mut row = vec![gamma.into(), s.into()];
            for which in [RenewalObservable::Indicator, RenewalObservable::Ones] {
                let rec = h.recursion_sum(s, plan.k_max, which)?;
                let closed = h.zeta_closed(s, which)?;
                let rel = (rec.value - closed).abs() / closed.abs();
                row.extend([
                    rec.value.into(),
                    rec.tail_bound.into(),
                    closed.into(),
                    rel.into(),
                    ((s - 1.0) * closed).into(),
                ]);
            }
            Ok(row)
        })
        .collect();
    let mut t = Table::new(
        "hofbauer",
        &[
            "gamma",
            "s",
            "recursion_indicator",
            "tail_bound_indicator",
            "closed_indicator",
            "rel_err_indicator",
            "residue_indicator",
            "recursion_ones",
            "tail_bound_ones",
            "closed_ones",
            "rel_err_ones",
            "residue_ones",
        ],
    );
    for r in rows {
        t.push(r?);
    }
    out.tables.push(t);

    let grid = default_s_grid();
    let ind = h.residue(RenewalObservable::Indicator, &grid)?;
    let ones = h.residue(RenewalObservable::Ones, &grid)?;
    let c = h.constants()?;
    let s = &mut out.summary;
    s.insert("limit_indicator".into(), ind.limit);
    s.insert("limit_ones".into(), ones.limit);
    s.insert("c".into(), c.c);
    s.insert("c_as_printed".into(), c.c_as_printed);
    s.insert("c_finite_difference".into(), c.c_finite_difference);
    s.insert("nu_one".into(), c.nu_one);
    s.insert("limit_indicator_times_c".into(), ind.limit * c.c);
    s.insert("limit_indicator_times_c_as_printed".into(), ind.limit * c.c_as_printed);
    s.insert("limit_ones_times_c".into(), ones.limit * c.c);
    s.insert("limit_ones_times_c_as_printed".into(), ones.limit * c.c_as_printed);
    s.insert("mu_c0".into(), c.mu_c0);
    s.insert("mu_c0_as_printed".into(), c.mu_c0_as_printed);
    s.insert("entropy".into(), c.entropy);
    s.insert("entropy_as_printed".into(), c.entropy_as_printed);
    out.error_bounds.insert("limit_indicator_residual".into(), ind.residual);
    out.error_bounds.insert("limit_ones_residual".into(), ones.residual);
    Ok(())
}

fn dyson_run(plan: &Plan, out: &mut RunOutput) -> Result<()> {
    let Model::Dyson { alpha } = plan.model else { unreachable!("validated") };
    let f = dyson_potential(alpha, 1e-13)?;
    let alphabet = crate::symbolic::Alphabet::full(2)?;
    let a = plan.observable.local(&alphabet, plan.depth)?;
    let opts = PipelineOptions {
        anchors: vec![TailPoint::constant(0), TailPoint::constant(1)],
        x: plan.x.clone(),
        y: plan.y.clone(),
        entries: plan.n,
    };
    let steps = walters_pipeline(&f, &plan.depths, &a, &opts)?;
    let mut t = Table::new(
        "dyson",
        &[
            "depth",
            "localization_error",
            "pressure",
            "normalization_defect",
            "integral",
            "entropy",
            "estimate",
            "predicted",
            "rel_gap",
            "increment",
            "zeta_limit",
            "zeta_increment",
        ],
    );
    let mut prev: Option<(f64, f64)> = None;
    for st in &steps {
        let (inc, zinc) = prev
            .map_or((f64::NAN, f64::NAN), |(p, z)| ((st.check.estimate.value - p).abs(), (st.zeta_limit - z).abs()));
        prev = Some((st.check.estimate.value, st.zeta_limit));
        t.push(vec![
            st.depth.into(),
            st.localization_error.into(),
            st.pressure.into(),
            st.normalization_defect.into(),
            st.check.integral.value.into(),
            st.check.entropy.into(),
            st.check.estimate.value.into(),
            st.check.predicted.into(),
            st.check.rel_gap.into(),
            inc.into(),
            st.zeta_limit.into(),
            zinc.into(),
        ]);
    }
    out.tables.push(t);
    if let Some(last) = steps.last() {
        out.summary.insert("estimate".into(), last.check.estimate.value);
        out.summary.insert("predicted".into(), last.check.predicted);
        out.summary.insert("rel_gap".into(), last.check.rel_gap);
        out.summary.insert("zeta_limit".into(), last.zeta_limit);
        out.error_bounds.insert("localization_error".into(), last.localization_error);
    }
    Ok(())
}

fn gurevich_run(plan: &Plan, out: &mut RunOutput) -> Result<()> {
    let (shift, pot, root_gamma): (CountableShift, Box<dyn CountablePotential>, Option<f64>) = match plan.model {
        Model::Geometric { kappa, renewal_gamma: None } => {
            (CountableShift::full(), Box::new(sgp_example_potential(kappa)?), None)
        }
        Model::Geometric { renewal_gamma: Some(g), .. } | Model::Hofbauer { gamma: g } => {
            (CountableShift::renewal(), Box::new(renewal_potential(g)?), Some(g))
        }
        _ => unreachable!("validated"),
    };
    let results: Vec<Result<_>> = plan
        .truncations
        .par_iter()
        .map(|&m| {
            let alphabet = shift.truncate(m)?;
            let local = pot.restrict(&alphabet)?;
            let est = gurevich_from_table(&alphabet, &local, 0, GUREVICH_HORIZON)?;
            let root = match root_gamma {
                Some(g) => renewal_pressure_root(g, m)?,
                None => f64::NAN,
            };
            Ok((m, est, root))
        })
        .collect();
    let mut t =
        Table::new("gurevich", &["truncation", "base_symbol", "pressure", "extrapolation_error", "renewal_root"]);
    let mut seq = Table::new("gurevich_sequence", &["truncation", "n", "log_z_over_n", "log_ratio"]);
    for r in results {
        let (m, est, root) = r?;
        t.push(vec![m.into(), (est.q as usize).into(), est.limit.into(), est.limit_error.into(), root.into()]);
        let ratios: BTreeMap<usize, f64> = est.log_ratios.iter().copied().collect();
        for &(n, v) in &est.values {
            seq.push(vec![m.into(), n.into(), v.into(), ratios.get(&n).copied().unwrap_or(f64::NAN).into()]);
        }
        out.summary.insert(format!("pressure_m{m}"), est.limit);
        out.error_bounds.insert(format!("pressure_m{m}"), est.limit_error);
    }
    out.tables.push(t);
    out.tables.push(seq);
    Ok(())
}

fn countable_run(plan: &Plan, out: &mut RunOutput) -> Result<()> {
    let Model::Geometric { kappa, .. } = plan.model else { unreachable!("validated") };
    let Observable::Cylinders(terms) = &plan.observable else {
        return Err(Error::Config {
            field: "observable".into(),
            reason: "countable-verify needs a finite cylinder combination".into(),
        });
    };
    let records = truncated_representation_check(kappa, &plan.truncations, terms, plan.n)?;
    let mut t = Table::new(
        "countable",
        &[
            "truncation",
            "pressure",
            "normalized_pressure",
            "entropy",
            "entropy_closed_form",
            "entropy_rel_err",
            "gap_ratio",
            "estimate",
            "predicted",
            "rel_gap",
        ],
    );
    for r in &records {
        t.push(vec![
            r.truncation.into(),
            r.pressure.limit.into(),
            r.normalized_pressure.limit.into(),
            r.entropy.into(),
            r.entropy_closed_form.into(),
            ((r.entropy - r.entropy_closed_form).abs() / r.entropy_closed_form).into(),
            r.gap_ratio.into(),
            r.check.estimate.value.into(),
            r.check.predicted.into(),
            r.check.rel_gap.into(),
        ]);
    }
    out.tables.push(t);
    if let Some(r) = records.last() {
        out.summary.insert("entropy".into(), r.entropy);
        out.summary.insert("entropy_closed_form".into(), r.entropy_closed_form);
        out.summary.insert("pressure".into(), r.pressure.limit);
        out.summary.insert("rel_gap".into(), r.check.rel_gap);
    }
    Ok(())
}

fn regularity_run(plan: &Plan, out: &mut RunOutput) -> Result<()> {
    if let Some(f) = plan.model.potential()? {
        let n_max = plan.depth.min(6);
        let grid: Vec<usize> = plan.depths.iter().copied().filter(|&d| d <= 12).collect();
        let report = walters_check(f.as_ref(), n_max, &grid, &TailGrid::default());
        let mut t = Table::new("regularity", &["n", "variation", "variation_exact", "walters_modulus"]);
        for ((n, v), (_, w)) in report.variations.iter().zip(&report.walters_modulus) {
            t.push(vec![(*n).into(), v.value.into(), v.exact.into(), (*w).into()]);
        }
        out.tables.push(t);
        if let Some(theta) = report.holder_exponent_estimate {
            out.summary.insert("holder_ratio_estimate".into(), theta);
        }
    }
    let cfg = triple(plan)?;
    let a = plan.observable.potential(cfg.alphabet())?;
    let rep = commutator_norm(a.as_ref(), &cfg, plan.depth);
    let mut t = Table::new("commutator", &["word_length", "increment", "partial_sum"]);
    for (i, (inc, ps)) in rep.increments.iter().zip(&rep.partial_sums).enumerate() {
        t.push(vec![(i + 1).into(), (*inc).into(), (*ps).into()]);
    }
    out.tables.push(t);
    out.summary.insert("alpha_metric".into(), cfg.alpha_metric);
    out.summary.insert("density_condition".into(), cfg.density_condition() as u8 as f64);
    out.summary.insert("sup_ratio".into(), rep.sup_ratio);
    out.summary.insert("summable".into(), rep.summable as u8 as f64);
    out.error_bounds.insert("commutator_tail".into(), rep.tail_estimate);
    Ok(())
}

/// Plot-ready series derived from a run: `(s-1)ζ(s)` against `s`, Dixmier
/// estimates against `log N`, entropy against depth, pressure against the truncation.
pub fn emit_plot_data(out: &RunOutput) -> Vec<PlotSeries> {
    const SPECS: &[(&str, &str, &str, &str)] = &[
        ("zeta", "s", "plus_times_s_minus_1", "residue_plus"),
        ("zeta", "s", "minus_times_s_minus_1", "residue_minus"),
        ("hofbauer", "s", "residue_indicator", "residue_indicator"),
        ("hofbauer", "s", "residue_ones", "residue_ones"),
        ("dixmier", "log_n", "estimate", "dixmier_vs_log_n"),
        ("dixmier", "log_n", "log_average", "log_average_vs_log_n"),
        ("dyson", "depth", "entropy", "entropy_vs_depth"),
        ("dyson", "depth", "estimate", "dixmier_vs_depth"),
        ("countable", "truncation", "entropy", "entropy_vs_truncation"),
        ("countable", "truncation", "pressure", "pressure_vs_truncation"),
        ("gurevich", "truncation", "pressure", "pressure_vs_truncation"),
        ("regularity", "n", "variation", "variation_vs_n"),
        ("commutator", "word_length", "partial_sum", "commutator_partial_sums"),
    ];
    let mut series = Vec::new();
    for &(table, x, y, name) in SPECS {
        let Some(t) = out.tables.iter().find(|t| t.name == table) else { continue };
        let (Some(xs), Some(ys)) = (t.column(x), t.column(y)) else { continue };
        series.push(PlotSeries {
            name: name.into(),
            x_label: x.into(),
            y_label: y.into(),
            points: xs.into_iter().zip(ys).collect(),
        });
    }
    series
}
