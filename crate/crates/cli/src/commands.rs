use std::path::Path;

use consonance_core::bsa::{bsa_ihdr, GammaParams, PredictiveFGCS};
use consonance_core::credal::{
    extreme_points, in_credal_set, lower_entropy, prop2_membership, sample_credal, ternary_coords, ProbabilityVector,
};
use consonance_core::harness::{run_uniformity_sweep, CoverageReport, MeasureKind, ProcessSpec};
use consonance_core::io::{render_scalar, ContourFile, MassEntry, RegionFile, SpaceFile};
use consonance_core::outcome::enumerate_events_of_size;
use consonance_core::possibility::{
    check_k_alternating, check_k_monotone, cloud_gamma, focal_elements, mass_from_belief, CapacityCheck, UpperLowerPair,
};
use consonance_core::region::{alpha_sweep, compare_measures, prop1_check, region, Inclusion};
use consonance_core::table1::{table1, TernaryPoint};
use consonance_core::transducer::{
    adjust_double_prime, adjust_prime, transduce_finite, transduce_grid, MeanAbsDistance, NonconformityMeasure,
    OneMinusEmpirical,
};
use consonance_core::{Contour, Error, Event, OutcomeSpace, Rational, Value};
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::args::{Adjust, Command, CredalOp, PossibilityOp, RegionCheck};
use crate::input::{read_column, read_json, read_parsed, split_list, write_csv, write_json};
use crate::{unit_alpha, CliError, CliResult, NumericMode, Report, RunConfig};

/// Calls `$f` instantiated at the value type chosen by `$mode`.
macro_rules! with_value {
    ($mode:expr, $f:ident($($arg:expr),*)) => {
        match $mode {
            NumericMode::Rational => $f::<Rational>($($arg),*),
            NumericMode::Float => $f::<f64>($($arg),*),
        }
    };
}

pub fn execute(cfg: &RunConfig) -> CliResult<Report> {
    match &cfg.command {
        Command::Transduce(a) => transduce(a, cfg.numeric),
        Command::Possibility(a) => {
            let (file, space) = load_contour(&a.contour)?;
            with_value!(resolve(cfg.numeric, &space)?, possibility(&file, &space, &a.op))
        }
        Command::Region(a) => match &a.check {
            Some(RegionCheck::Prop1 { contour, alphas }) => {
                let (file, space) = load_contour(contour)?;
                with_value!(resolve(cfg.numeric, &space)?, prop1(&file, &space, alphas.as_deref()))
            }
            Some(RegionCheck::Compare { space, data, psi1, psi2, alpha }) => compare(space, data, *psi1, *psi2, alpha),
            None => {
                let path = a.contour.as_deref().expect("checked by parse_args");
                let alpha = a.alpha.as_deref().expect("checked by parse_args");
                let (file, space) = load_contour(path)?;
                with_value!(resolve(cfg.numeric, &space)?, region_at(&file, &space, alpha, a.kind.into()))
            }
        },
        Command::Credal(a) => {
            let (file, space) = load_contour(&a.contour)?;
            with_value!(resolve(cfg.numeric, &space)?, credal(&file, &space, &a.op))
        }
        Command::Bsa(a) => bsa(a),
        Command::Coverage(a) => coverage(a),
        Command::Table1(a) => worked_example(a),
    }
}

fn resolve(numeric: Option<NumericMode>, space: &OutcomeSpace) -> CliResult<NumericMode> {
    match (numeric, space) {
        (Some(NumericMode::Rational), OutcomeSpace::Grid(_)) => {
            Err(CliError::Usage("rational mode applies to label spaces only".into()))
        }
        (Some(mode), _) => Ok(mode),
        (None, OutcomeSpace::Finite(_)) => Ok(NumericMode::Rational),
        (None, OutcomeSpace::Grid(_)) => Ok(NumericMode::Float),
    }
}

fn load_contour(path: &Path) -> CliResult<(ContourFile, OutcomeSpace)> {
    let file: ContourFile = read_json(path)?;
    let space = file.space()?;
    Ok((file, space))
}

fn names(space: &OutcomeSpace, event: &Event) -> Vec<String> {
    match space {
        OutcomeSpace::Finite(f) => f.event_labels(event),
        OutcomeSpace::Grid(g) => event.indices().iter().map(|&i| g.point(i).to_string()).collect(),
    }
}

fn outcome_names(space: &OutcomeSpace) -> Vec<String> {
    names(space, &Event::full(space.size()))
}

fn braces(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn parse_event(space: &OutcomeSpace, text: &str) -> CliResult<Event> {
    match space {
        OutcomeSpace::Finite(f) => Ok(f.event_from_labels(&split_list(text)?)?),
        OutcomeSpace::Grid(_) => Err(CliError::Usage("events are given by label and grid contours have none".into())),
    }
}

fn parse_values<V: Value>(text: &str) -> CliResult<Vec<V>> {
    split_list(text)?
        .into_iter()
        .map(|s| V::parse(s).ok_or_else(|| CliError::Usage(format!("cannot read {s:?} as a number"))))
        .collect()
}

fn parse_value<V: Value>(text: &str) -> CliResult<V> {
    Ok(parse_values::<V>(text)?.remove(0))
}

fn render_all<V: Value>(values: &[V]) -> Vec<Json> {
    values.iter().map(render_scalar).collect()
}

/// Left-aligned columns separated by two spaces.
fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

/// Built-in measures on label indices.
struct LabelMeasure(MeasureKind);

impl LabelMeasure {
    fn new(kind: MeasureKind) -> CliResult<Self> {
        match kind {
            MeasureKind::MeanAbs => Err(incompatible(kind, "label")),
            _ => Ok(Self(kind)),
        }
    }
}

impl NonconformityMeasure<usize> for LabelMeasure {
    type Score = Rational;

    fn score(&self, rest: &[usize], y: &usize) -> consonance_core::Result<Rational> {
        match self.0 {
            MeasureKind::OneMinusEmp => OneMinusEmpirical.score(rest, y),
            _ => Ok(Rational::zero()),
        }
    }

    fn scores(&self, bag: &[usize]) -> consonance_core::Result<Vec<Rational>> {
        match self.0 {
            MeasureKind::OneMinusEmp => OneMinusEmpirical.scores(bag),
            _ => Ok(vec![Rational::zero(); bag.len()]),
        }
    }
}

/// Built-in measures on real observations.
struct RealMeasure(MeasureKind);

impl RealMeasure {
    fn new(kind: MeasureKind) -> CliResult<Self> {
        match kind {
            MeasureKind::OneMinusEmp => Err(incompatible(kind, "grid")),
            _ => Ok(Self(kind)),
        }
    }
}

impl NonconformityMeasure<f64> for RealMeasure {
    type Score = f64;

    fn score(&self, rest: &[f64], y: &f64) -> consonance_core::Result<f64> {
        match self.0 {
            MeasureKind::MeanAbs => MeanAbsDistance.score(rest, y),
            _ => Ok(0.0),
        }
    }

    fn scores(&self, bag: &[f64]) -> consonance_core::Result<Vec<f64>> {
        match self.0 {
            MeasureKind::MeanAbs => MeanAbsDistance.scores(bag),
            _ => Ok(vec![0.0; bag.len()]),
        }
    }
}

fn incompatible(kind: MeasureKind, family: &str) -> CliError {
    Error::IncompatibleMeasure { measure: kind.name().into(), family: family.into() }.into()
}

fn label_data(space: &OutcomeSpace, path: &Path) -> CliResult<Vec<usize>> {
    let OutcomeSpace::Finite(f) = space else { unreachable!("label data on a grid") };
    Ok(read_column(path)?.iter().map(|s| f.index_of(s)).collect::<Result<_, _>>()?)
}

fn transduce(a: &crate::args::TransduceArgs, numeric: Option<NumericMode>) -> CliResult<Report> {
    let space = read_json::<SpaceFile>(&a.space)?.into_space()?;
    let mode = resolve(numeric, &space)?;
    let raw = match &space {
        OutcomeSpace::Finite(f) => {
            let psi = LabelMeasure::new(a.psi.unwrap_or(MeasureKind::OneMinusEmp))?;
            transduce_finite(&label_data(&space, &a.data)?, f, &psi)?.contour
        }
        OutcomeSpace::Grid(g) => {
            let psi = RealMeasure::new(a.psi.unwrap_or(MeasureKind::MeanAbs))?;
            transduce_grid(&read_parsed::<f64>(&a.data)?, g, &psi)?.contour
        }
    };
    let contour = match a.adjust {
        Adjust::Auto if raw.is_consonant() => raw,
        Adjust::Auto | Adjust::DoublePrime => adjust_double_prime(&raw),
        Adjust::None => raw,
        Adjust::Prime => adjust_prime(&raw)?,
    };
    let file = match mode {
        NumericMode::Rational => ContourFile::from_contour(&contour, &space),
        NumericMode::Float => ContourFile::from_contour(&contour.to_f64(), &space),
    };
    if let Some(out) = &a.out {
        write_json(out, &file)?;
    }

    let rows: Vec<Vec<String>> = outcome_names(&space)
        .into_iter()
        .zip(&file.pi)
        .map(|(name, pi)| vec![name, pi.as_str().map_or_else(|| pi.to_string(), str::to_string)])
        .collect();
    let text = format!(
        "{}consonant: {}\nprovenance: {:?}\n",
        table(&["outcome", "pi"], &rows),
        contour.is_consonant(),
        contour.provenance()
    );
    Ok(Report { json: serde_json::to_value(&file).expect("contour file serializes"), text, passed: true })
}

fn possibility<V: Value>(file: &ContourFile, space: &OutcomeSpace, op: &PossibilityOp) -> CliResult<Report> {
    let c: Contour<V> = file.contour()?;
    let pair = UpperLowerPair::new(&c)?;
    let k = space.size();
    let upper = |e: &Event| pair.upper(e).expect("event from this space");
    let lower = |e: &Event| pair.lower(e).expect("event from this space");

    match op {
        PossibilityOp::Upper { event } | PossibilityOp::Lower { event } => {
            let (key, f): (&str, &dyn Fn(&Event) -> V) =
                if matches!(op, PossibilityOp::Upper { .. }) { ("upper", &upper) } else { ("lower", &lower) };
            let events = match event {
                Some(text) => vec![parse_event(space, text)?],
                None => enumerate_events_of_size(k)?,
            };
            let mut rows = Vec::new();
            let mut out = Vec::new();
            for e in &events {
                let value = f(e);
                rows.push(vec![braces(&names(space, e)), value.render()]);
                out.push(json!({ "event": names(space, e), key: render_scalar(&value) }));
            }
            Ok(Report { json: Json::Array(out), text: table(&["event", key], &rows), passed: true })
        }
        PossibilityOp::Mass | PossibilityOp::Focal => {
            let m = mass_from_belief(lower, k)?;
            if matches!(op, PossibilityOp::Mass) {
                let entries: Vec<MassEntry> = m
                    .entries()
                    .into_iter()
                    .map(|(e, v)| MassEntry { event: names(space, &e), mass: render_scalar(&v) })
                    .collect();
                let rows: Vec<Vec<String>> =
                    m.entries().iter().map(|(e, v)| vec![braces(&names(space, e)), v.render()]).collect();
                let json = serde_json::to_value(&entries).expect("mass entries serialize");
                return Ok(Report { json, text: table(&["event", "mass"], &rows), passed: true });
            }
            let focal = focal_elements(&m);
            let listed: Vec<Vec<String>> = focal.events.iter().map(|e| names(space, e)).collect();
            let mut text: String = listed.iter().map(|e| braces(e) + "\n").collect();
            text += &format!("nested: {}\n", focal.nested);
            let json = json!({ "focal": listed, "nested": focal.nested });
            Ok(Report { json, text, passed: focal.nested })
        }
        PossibilityOp::CheckAlt { k: order } | PossibilityOp::CheckMon { k: order } => {
            let (what, check) = if matches!(op, PossibilityOp::CheckAlt { .. }) {
                ("alternating", check_k_alternating(upper, *order, k)?)
            } else {
                ("monotone", check_k_monotone(lower, *order, k)?)
            };
            let mut text = format!("{order}-{what}: {}\n", if check.holds() { "holds" } else { "violated" });
            let witness = match &check {
                CapacityCheck::Holds => Json::Null,
                CapacityCheck::Violated(w) => {
                    let parts: Vec<Vec<String>> = w.parts.iter().map(|p| names(space, p)).collect();
                    text += &format!(
                        "witness: A = {}, parts = [{}], lhs = {}, rhs = {}\n",
                        braces(&names(space, &w.a)),
                        parts.iter().map(|p| braces(p)).collect::<Vec<_>>().join(", "),
                        w.lhs.render(),
                        w.rhs.render()
                    );
                    json!({ "a": names(space, &w.a), "parts": parts, "lhs": render_scalar(&w.lhs), "rhs": render_scalar(&w.rhs) })
                }
            };
            let json = json!({ "property": format!("{order}-{what}"), "holds": check.holds(), "witness": witness });
            Ok(Report { json, text, passed: check.holds() })
        }
        PossibilityOp::Cloud => {
            let cloud = cloud_gamma(&c)?;
            let rows: Vec<Vec<String>> = outcome_names(space)
                .into_iter()
                .zip(cloud.gamma.values().iter().zip(cloud.pi.values()))
                .map(|(name, (g, p))| vec![name, g.render(), p.render()])
                .collect();
            let json = json!({
                "outcomes": outcome_names(space),
                "gamma": render_all(cloud.gamma.values()),
                "pi": render_all(cloud.pi.values()),
            });
            Ok(Report { json, text: table(&["outcome", "gamma", "pi"], &rows), passed: true })
        }
    }
}

fn region_at<V: Value>(
    file: &ContourFile,
    space: &OutcomeSpace,
    alpha: &str,
    kind: consonance_core::region::RegionKind,
) -> CliResult<Report> {
    let c: Contour<V> = file.contour()?;
    let r = region(&c, &parse_value::<V>(alpha)?, kind)?;
    let payload = RegionFile::new(&r, space);
    let text = format!(
        "{} at alpha {}: {} (size {})\n",
        serde_json::to_value(kind).expect("kind serializes").as_str().unwrap_or_default(),
        r.alpha.render(),
        braces(&names(space, &r.event)),
        payload.size
    );
    Ok(Report { json: serde_json::to_value(&payload).expect("region serializes"), text, passed: true })
}

fn prop1<V: Value>(file: &ContourFile, space: &OutcomeSpace, alphas: Option<&str>) -> CliResult<Report> {
    let c: Contour<V> = file.contour()?;
    let extra = alphas.map(parse_values::<V>).transpose()?.unwrap_or_default();
    let report = prop1_check(&c, &alpha_sweep(&c, &extra))?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.alpha.render(),
                braces(&names(space, &r.cpr)),
                braces(&names(space, &r.cut)),
                braces(&names(space, &r.intersection)),
                if r.agrees() { "yes" } else { "NO" }.into(),
            ]
        })
        .collect();
    let violations: Vec<Json> = report
        .violations()
        .map(|r| {
            json!({
                "alpha": render_scalar(&r.alpha),
                "cpr": names(space, &r.cpr),
                "cut": names(space, &r.cut),
                "intersection": names(space, &r.intersection),
            })
        })
        .collect();
    let passed = report.passed();
    let text = format!(
        "{}{} levels checked, {} disagreements: {}\n",
        table(&["alpha", "cpr", "cut", "intersection", "agree"], &rows),
        report.rows.len(),
        violations.len(),
        if passed { "PASS" } else { "FAIL" }
    );
    let json = json!({ "passed": passed, "levels": report.rows.len(), "violations": violations });
    Ok(Report { json, text, passed })
}

fn compare(space_path: &Path, data: &Path, psi1: MeasureKind, psi2: MeasureKind, alpha: &str) -> CliResult<Report> {
    let space = read_json::<SpaceFile>(space_path)?.into_space()?;
    let alpha = unit_alpha(alpha)?;
    let cmp = match &space {
        OutcomeSpace::Finite(f) => {
            let candidates: Vec<usize> = (0..f.size()).collect();
            let (m1, m2) = (LabelMeasure::new(psi1)?, LabelMeasure::new(psi2)?);
            compare_measures(&label_data(&space, data)?, &candidates, &space, &m1, &m2, &alpha)?
        }
        OutcomeSpace::Grid(g) => {
            let candidates: Vec<f64> = g.points().collect();
            let (m1, m2) = (RealMeasure::new(psi1)?, RealMeasure::new(psi2)?);
            compare_measures(&read_parsed::<f64>(data)?, &candidates, &space, &m1, &m2, &alpha)?
        }
    };
    let relation = match cmp.relation {
        Inclusion::Equal => "equal",
        Inclusion::Subset => "subset",
        Inclusion::Superset => "superset",
        Inclusion::Incomparable => "incomparable",
    };
    let text = format!(
        "{}: {} (size {})\n{}: {} (size {})\nfirst region is {relation} relative to the second\n",
        psi1.name(),
        braces(&names(&space, &cmp.region1)),
        cmp.size1,
        psi2.name(),
        braces(&names(&space, &cmp.region2)),
        cmp.size2,
    );
    let json = json!({
        "alpha": cmp.alpha.render(),
        "psi1": psi1.name(),
        "psi2": psi2.name(),
        "region1": names(&space, &cmp.region1),
        "region2": names(&space, &cmp.region2),
        "size1": cmp.size1,
        "size2": cmp.size2,
        "relation": relation,
    });
    Ok(Report { json, text, passed: true })
}

fn vector_text<V: Value>(p: &ProbabilityVector<V>) -> String {
    format!("({})", p.weights().iter().map(Value::render).collect::<Vec<_>>().join(", "))
}

fn credal<V: Value>(file: &ContourFile, space: &OutcomeSpace, op: &CredalOp) -> CliResult<Report> {
    let c: Contour<V> = file.contour()?;
    match op {
        CredalOp::Check { p } => {
            let p = ProbabilityVector::new(parse_values::<V>(p)?)?;
            let member = in_credal_set(&p, &c)?;
            let criterion = prop2_membership(&p, &c)?;
            let text =
                format!("p = {}\nmember (all events): {member}\nmember (alpha cuts): {criterion}\n", vector_text(&p));
            let json = json!({ "p": render_all(p.weights()), "member": member, "alpha_cut_member": criterion });
            Ok(Report { json, text, passed: member && criterion })
        }
        CredalOp::Extremes => {
            let vertices = extreme_points(&c)?;
            let text = format!("outcomes: {}\n", braces(&outcome_names(space)))
                + &vertices.iter().map(|v| vector_text(v) + "\n").collect::<String>();
            let json = json!({
                "outcomes": outcome_names(space),
                "vertices": vertices.iter().map(|v| render_all(v.weights())).collect::<Vec<_>>(),
            });
            Ok(Report { json, text, passed: true })
        }
        CredalOp::Entropy => {
            let h = lower_entropy(&c)?;
            let text = format!("lower entropy: {} nats\nminimiser: {}\n", h.nats, vector_text(&h.minimiser));
            let json = json!({ "lower_entropy_nats": h.nats, "minimiser": render_all(h.minimiser.weights()) });
            Ok(Report { json, text, passed: true })
        }
        CredalOp::Sample { count, seed } => {
            let samples = sample_credal(&c, *count, seed.expect("checked by parse_args"))?;
            let text = samples.iter().map(|s| vector_text(s) + "\n").collect();
            let json = json!({
                "outcomes": outcome_names(space),
                "samples": samples.iter().map(|s| s.weights().to_vec()).collect::<Vec<_>>(),
            });
            Ok(Report { json, text, passed: true })
        }
        CredalOp::Ternary { out, count, seed, p } => {
            let out = out.as_deref().expect("checked by parse_args");
            let mut points = Vec::new();
            let mut push = |v: &ProbabilityVector<f64>, label: &str| -> CliResult<()> {
                let (x, y) = ternary_coords(v)?;
                points.push(TernaryPoint { x, y, label: label.into() });
                Ok(())
            };
            for v in extreme_points(&c)? {
                push(&v.to_f64(), "vertex")?;
            }
            for s in sample_credal(&c, *count, seed.unwrap_or(0))? {
                push(&s, "member")?;
            }
            if let Some(p) = p {
                push(&ProbabilityVector::new(parse_values::<V>(p)?)?.to_f64(), "p")?;
            }
            write_csv(out, &points)?;
            let text = format!("wrote {} points to {}\n", points.len(), out.display());
            let json = json!({ "out": out, "points": points });
            Ok(Report { json, text, passed: true })
        }
    }
}

fn bsa(a: &crate::args::BsaArgs) -> CliResult<Report> {
    let priors: Vec<GammaParams> = match a.priors.strip_prefix('@') {
        Some(path) => read_json(Path::new(path))?,
        None => serde_json::from_str(&a.priors).map_err(|e| CliError::Usage(format!("--priors: {e}")))?,
    };
    let data: Vec<i64> = a.data.as_deref().map(read_parsed).transpose()?.unwrap_or_default();
    let alpha: f64 = unit_alpha(&a.alpha)?.to_f64();
    let fgcs = PredictiveFGCS::from_priors(&priors, &data)?;
    let result = bsa_ihdr(&fgcs, alpha)?;

    let mut json = serde_json::to_value(&result).expect("BSA result serializes");
    json["posteriors"] = serde_json::to_value(fgcs.posteriors()).expect("Gamma parameters serialize");
    let components: Vec<String> = result.component_probs.iter().map(|p| format!("{p:.6}")).collect();
    let text = format!(
        "support ({} counts): {:?}\ncomponent probabilities: [{}]\nlower probability: {:.6} (target {:.6})\nexhaustively verified: {}\n",
        result.support.len(),
        result.support,
        components.join(", "),
        result.lower_prob,
        1.0 - alpha,
        result.exhaustive_verified
    );
    Ok(Report { json, text, passed: true })
}

#[derive(Serialize)]
struct CoverageRow<'a> {
    family: &'a str,
    n: usize,
    alpha: f64,
    trials: usize,
    hits: usize,
    coverage: f64,
    se: f64,
    pass: &'static str,
}

fn verdict(r: &CoverageReport) -> &'static str {
    match r.pass {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

fn coverage(a: &crate::args::CoverageArgs) -> CliResult<Report> {
    let specs: Vec<ProcessSpec> = match read_json::<Json>(&a.spec)? {
        Json::Array(items) => items.into_iter().map(serde_json::from_value).collect::<Result<_, _>>(),
        single => serde_json::from_value(single).map(|s| vec![s]),
    }
    .map_err(|e| CliError::io(&a.spec, e))?;
    let ns = split_list(&a.n)?
        .into_iter()
        .map(|s| s.parse::<usize>().map_err(|_| CliError::Usage(format!("--n: cannot read {s:?}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let alphas =
        split_list(&a.alpha)?.into_iter().map(|s| Ok(unit_alpha(s)?.to_f64())).collect::<CliResult<Vec<_>>>()?;
    let seed = a.seed.expect("checked by parse_args");
    let reports = run_uniformity_sweep(&specs, &ns, &alphas, a.psi, a.trials, seed)?;

    let rows: Vec<CoverageRow> = reports
        .iter()
        .map(|r| CoverageRow {
            family: &r.family,
            n: r.n,
            alpha: r.alpha,
            trials: r.trials,
            hits: r.hits,
            coverage: r.empirical_coverage,
            se: r.standard_error,
            pass: verdict(r),
        })
        .collect();
    if let Some(out) = &a.out {
        write_csv(out, &rows)?;
    }
    let passed = reports.iter().all(|r| r.pass != Some(false) && r.mismatches == 0);
    let table_rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.family.clone(),
                r.psi.name().into(),
                r.n.to_string(),
                r.alpha.to_string(),
                r.trials.to_string(),
                format!("{:.4}", r.empirical_coverage),
                format!("{:.4}", r.standard_error),
                r.mismatches.to_string(),
                match r.pass {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "-",
                }
                .into(),
            ]
        })
        .collect();
    let text =
        table(&["family", "psi", "n", "alpha", "trials", "coverage", "se", "ihdr-mismatch", "verdict"], &table_rows);
    Ok(Report { json: serde_json::to_value(&reports).expect("reports serialize"), text, passed })
}

fn worked_example(a: &crate::args::Table1Args) -> CliResult<Report> {
    let samples = if a.seed.is_some() { a.samples } else { 0 };
    let r = table1(samples, a.seed.unwrap_or(0))?;
    if let Some(out) = &a.ternary_out {
        write_csv(out, &r.ternary)?;
    }
    let space: OutcomeSpace = r.space.clone().into();

    let mut text = String::from("contour\n");
    let contour_rows: Vec<Vec<String>> =
        outcome_names(&space).into_iter().zip(r.contour.values()).map(|(l, v)| vec![l, v.render()]).collect();
    text += &table(&["outcome", "pi"], &contour_rows);
    text += "\nlower and upper probabilities\n";
    let rows: Vec<Vec<String>> =
        r.rows.iter().map(|row| vec![braces(&row.event), row.lower.render(), row.upper.render()]).collect();
    text += &table(&["event", "lower", "upper"], &rows);
    text += "\nmass function\n";
    let mass_rows: Vec<Vec<String>> = r.mass.iter().map(|(e, m)| vec![braces(&names(&space, e)), m.render()]).collect();
    text += &table(&["event", "mass"], &mass_rows);
    text += &format!(
        "\nfocal elements nested: {}\nempirical pmf (0.2, 0.3, 0.5) in credal set: {}\nlower entropy: {} nats\nternary points: {}\n",
        r.focal_chain,
        r.p_emp_member,
        r.lower_entropy,
        r.ternary.len()
    );
    for m in &r.mismatches {
        text += &format!("MISMATCH: {m}\n");
    }
    text += if r.passed() { "fixture: PASS\n" } else { "fixture: FAIL\n" };

    let json = json!({
        "contour": ContourFile::from_contour(&r.contour, &space),
        "rows": r.rows.iter().map(|row| json!({
            "event": row.event,
            "lower": row.lower.render(),
            "upper": row.upper.render(),
        })).collect::<Vec<_>>(),
        "mass": r.mass.iter().map(|(e, m)| MassEntry { event: names(&space, e), mass: render_scalar(m) }).collect::<Vec<_>>(),
        "focal_nested": r.focal_chain,
        "p_emp_member": r.p_emp_member,
        "lower_entropy_nats": r.lower_entropy,
        "ternary": r.ternary,
        "mismatches": r.mismatches,
        "passed": r.passed(),
    });
    Ok(Report { json, text, passed: r.passed() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::read_text;

    #[test]
    fn tables_align() {
        let t = table(&["a", "bb"], &[vec!["xxx".into(), "y".into()]]);
        assert_eq!(t, "a    bb\nxxx  y\n");
    }

    #[test]
    fn label_measure_matches_the_library() {
        let bag = [0usize, 0, 1, 2, 2, 2];
        assert_eq!(
            LabelMeasure(MeasureKind::OneMinusEmp).scores(&bag).unwrap(),
            OneMinusEmpirical.scores(&bag).unwrap()
        );
        assert!(LabelMeasure::new(MeasureKind::MeanAbs).is_err());
        assert!(RealMeasure::new(MeasureKind::OneMinusEmp).is_err());
        let real = [0.5, 1.5, -2.0];
        assert_eq!(RealMeasure(MeasureKind::MeanAbs).scores(&real).unwrap(), MeanAbsDistance.scores(&real).unwrap());
        assert_eq!(RealMeasure(MeasureKind::Constant).score(&real, &0.0).unwrap(), 0.0);
    }

    #[test]
    fn rational_mode_is_rejected_on_grids() {
        let grid: OutcomeSpace = consonance_core::GridOutcomeSpace::new(0.0, 1.0, 3).unwrap().into();
        assert!(resolve(Some(NumericMode::Rational), &grid).is_err());
        assert_eq!(resolve(None, &grid).unwrap(), NumericMode::Float);
    }

    #[test]
    fn read_text_reports_the_path() {
        let err = read_text(Path::new("/nonexistent/x.json")).unwrap_err();
        assert_eq!(err.exit_code(), crate::EXIT_IO);
        assert!(err.to_string().starts_with("/nonexistent/x.json"));
    }
}
