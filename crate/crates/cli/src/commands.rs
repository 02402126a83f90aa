use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use aee_core::diagnostics::{invert_cdf, side_for, tail_scan, usable_order};
use aee_core::engine::{lambda_form, ExpansionSet, HARD_MAX_ORDER};
use aee_core::mc::sample_statistic;
use aee_core::{Arity, BoundExpansion, Deriver, Grid, SampleSizes, Side, StatisticKind, TailReport};
use serde_json::{json, Value};

use crate::args::{DiagnoseArgs, EvalArgs, ExpandArgs, Format, GridArgs, SimulateArgs};
use crate::error::Failure;
use crate::input::{prior, Problem};

const ORDER_ENV: &str = "AEE_MAX_ORDER";

fn order_cap() -> Result<u32, Failure> {
    match std::env::var(ORDER_ENV) {
        Ok(v) => {
            let cap: u32 =
                v.trim().parse().map_err(|_| Failure::Config(format!("{ORDER_ENV}=`{v}` is not an integer")))?;
            if cap > HARD_MAX_ORDER {
                return Err(Failure::Config(format!("{ORDER_ENV}={cap} exceeds the hard cap {HARD_MAX_ORDER}")));
            }
            Ok(cap)
        }
        Err(_) => Ok(aee_core::engine::DEFAULT_MAX_ORDER),
    }
}

fn derive(kind: StatisticKind, order: u32) -> Result<(Deriver, Arc<ExpansionSet>), Failure> {
    let cap = order_cap()?;
    if order > cap {
        return Err(Failure::Config(format!("order {order} exceeds the cap {cap} (raise it with {ORDER_ENV})")));
    }
    if order == HARD_MAX_ORDER {
        eprintln!("warning: order {order} derivations take minutes and several GB of memory");
    }
    let deriver = Deriver::new(cap.max(order))?;
    let es = deriver.derive(kind.arity(), order)?;
    Ok((deriver, es))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn expand(args: &ExpandArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let (deriver, es) = derive(args.test, args.order)?;
    if args.trace {
        let keys = deriver.moment_engine().memo_keys();
        eprintln!("derived order {} in {:.2?}; {} memoized moment series", args.order, start.elapsed(), keys.len());
        for (c1, c2, centered, vmax, nterms) in keys {
            let vmax = vmax.map_or_else(|| "-".to_string(), |v| v.to_string());
            eprintln!("  E[Xbar^{c1} X2bar^{c2}] centered={centered} cap={vmax} terms={nterms}");
        }
    }
    let lf = if args.lambda_form { Some(lambda_form(&es, args.test)?) } else { None };
    let text = match args.format {
        Format::Json => {
            let mut doc = json!({
                "test": args.test.token(),
                "order": args.order,
                "r2": args.test.r2_formula(),
                "expansion": es.to_json(args.with_k_table),
            });
            if let Some(lf) = &lf {
                doc["lambda_form"] = lf.to_json();
            }
            pretty(&doc)
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "# {} order {}", args.test, args.order).unwrap();
            writeln!(out, "r2 = {}", args.test.r2_formula()).unwrap();
            match &lf {
                Some(lf) => {
                    writeln!(out, "# x below stands for x / r").unwrap();
                    for k in 1..=args.order as usize {
                        writeln!(out, "q{k} = {}", lf.render(k)).unwrap();
                    }
                }
                None => {
                    writeln!(out, "# y = x / r").unwrap();
                    for (i, q) in es.q().iter().enumerate() {
                        let terms: Vec<String> = q
                            .hermite
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| !c.is_zero())
                            .map(|(d, c)| format!("({c})*He{d}(y)"))
                            .collect();
                        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                        writeln!(out, "q{} = {body}", i + 1).unwrap();
                    }
                }
            }
            if args.with_k_table {
                for ((j, l), v) in es.k_table().entries() {
                    writeln!(out, "k[{j},{l}] = {v}").unwrap();
                }
            }
            out
        }
        Format::Csv => return Err(Failure::Config("expand writes json or text".into())),
    };
    emit(&text, args.output.as_deref())
}

fn grid_for(bound: &BoundExpansion, g: &GridArgs) -> Grid {
    let d = Grid::default_for(bound.r());
    Grid { lo: g.lo.unwrap_or(d.lo), hi: g.hi.unwrap_or(d.hi), step: g.step }
}

fn side_name(side: Option<Side>) -> &'static str {
    match side {
        Some(Side::Left) => "left",
        Some(Side::Right) => "right",
        None => "center",
    }
}

struct Row {
    key: &'static str,
    at: f64,
    terms: Vec<Option<f64>>,
    side: Option<Side>,
    usable: u32,
    value: Option<f64>,
}

fn x_row(bound: &BoundExpansion, report: &TailReport, x: f64) -> Row {
    let terms: Vec<Option<f64>> = bound.cdf_all(x).into_iter().map(Some).collect();
    let (side, usable) = if x < 0.0 {
        (Some(Side::Left), usable_order(report, Side::Left))
    } else if x > 0.0 {
        (Some(Side::Right), usable_order(report, Side::Right))
    } else {
        (None, usable_order(report, Side::Left).min(usable_order(report, Side::Right)))
    };
    let value = terms[usable as usize];
    Row { key: "x", at: x, terms, side, usable, value }
}

fn p_row(bound: &BoundExpansion, report: &TailReport, p: f64) -> Result<Row, Failure> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Failure::Config(format!("probability {p} is outside (0, 1)")));
    }
    let mut terms = Vec::new();
    let mut selected = (Side::Left, 0, None);
    for t in 0..=bound.order() {
        let side = side_for(bound, p, t)?;
        let q = invert_cdf(bound, report, p, side, t).ok();
        if q.is_some() && t <= usable_order(report, side) {
            selected = (side, t, q);
        }
        terms.push(q);
    }
    let (side, usable, value) = selected;
    Ok(Row { key: "p", at: p, terms, side: Some(side), usable, value })
}

fn render_rows(rows: &[Row], header: Value, order: u32, format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        r.key: r.at,
                        "terms": r.terms,
                        "side": side_name(r.side),
                        "usable_order": r.usable,
                        "value": r.value,
                    })
                })
                .collect();
            let mut doc = header;
            doc["rows"] = Value::Array(rows);
            pretty(&doc)
        }
        Format::Csv | Format::Text => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let cell = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:.12}"));
            let mut out = String::new();
            let key = rows.first().map_or("x", |r| r.key);
            let mut cols = vec![key.to_string(), "side".into(), "usable_order".into(), "value".into()];
            cols.extend((0..=order).map(|t| format!("term{t}")));
            writeln!(out, "{}", cols.join(sep)).unwrap();
            for r in rows {
                let mut cells = vec![r.at.to_string(), side_name(r.side).into(), r.usable.to_string(), cell(r.value)];
                cells.extend(r.terms.iter().map(|&v| cell(v)));
                writeln!(out, "{}", cells.join(sep)).unwrap();
            }
            out
        }
    }
}

pub fn eval(args: &EvalArgs) -> Result<(), Failure> {
    let (_, es) = derive(args.test, args.order)?;
    let problem = Problem::load(args.test, &args.input, args.order)?;
    let bound = problem.bind(&es)?;
    let report = tail_scan(&bound, grid_for(&bound, &args.grid))?;
    let mut rows: Vec<Row> = args.x.iter().map(|&x| x_row(&bound, &report, x)).collect();
    for &p in &args.p {
        rows.push(p_row(&bound, &report, p)?);
    }
    let header = json!({
        "test": args.test.token(),
        "order": args.order,
        "n": bound.n(),
        "r": bound.r(),
        "usable_order": report.usable_order(),
    });
    emit(&render_rows(&rows, header, args.order, args.format), args.output.as_deref())
}

pub fn diagnose(args: &DiagnoseArgs) -> Result<(), Failure> {
    let (_, es) = derive(args.test, args.order)?;
    let problem = Problem::load(args.test, &args.input, args.order)?;
    let bound = problem.bind(&es)?;
    let report = tail_scan(&bound, grid_for(&bound, &args.grid))?;
    let text = match args.format {
        Format::Json => {
            let mut doc = report.to_json();
            doc["test"] = json!(args.test.token());
            doc["order"] = json!(args.order);
            doc["r"] = json!(bound.r());
            pretty(&doc)
        }
        Format::Csv | Format::Text => {
            let sep = if args.format == Format::Csv { "," } else { "\t" };
            let mut out = format!("side{sep}terms{sep}usable{sep}violation_x\n");
            for side in [Side::Left, Side::Right] {
                for c in report.checks(side) {
                    let v = c.violation_x.map_or_else(String::new, |v| v.to_string());
                    writeln!(out, "{}{sep}{}{sep}{}{sep}{v}", side_name(Some(side)), c.terms, c.usable).unwrap();
                }
            }
            out
        }
    };
    emit(&text, args.output.as_deref())
}

const DEFAULT_COMPARE_X: [f64; 13] = [-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let kind = args.test;
    let sizes = match (kind.arity(), args.n, args.nx, args.ny) {
        (Arity::OneSample, Some(n), None, None) => SampleSizes::One(n),
        (Arity::TwoSample, None, Some(nx), Some(ny)) => SampleSizes::Two(nx, ny),
        (Arity::OneSample, ..) => return Err(Failure::Config(format!("{kind} needs --n"))),
        (Arity::TwoSample, ..) => return Err(Failure::Config(format!("{kind} needs --nx and --ny"))),
    };
    let prior = prior(args.d0, args.s02)?;
    // fail on the cheap checks before spending time on either side
    let derived = if args.compare { Some(derive(kind, args.order)?) } else { None };
    let ecdf = sample_statistic(&args.dist, kind, sizes, args.reps, args.seed, prior.as_ref())?;

    if let Some(path) = &args.dump {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
        let io = |e: csv::Error| Failure::Config(format!("cannot write {}: {e}", path.display()));
        w.write_record(["statistic"]).map_err(io)?;
        for v in ecdf.values() {
            w.write_record([format!("{v:e}")]).map_err(io)?;
        }
        w.flush().map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }

    let compare = match derived {
        Some((_, es)) => {
            let need = args.order as usize + 2;
            let (x, y) = match sizes {
                SampleSizes::One(n) => (args.dist.moments(n, need)?, None),
                SampleSizes::Two(nx, ny) => (args.dist.moments(nx, need)?, Some(args.dist.moments(ny, need)?)),
            };
            let bound = Problem::new(kind, x, y, prior.as_ref(), true)?.bind(&es)?;
            let points = if args.x.is_empty() { DEFAULT_COMPARE_X.to_vec() } else { args.x.clone() };
            Some(
                points
                    .into_iter()
                    .map(|x| {
                        let emp = ecdf.at(x);
                        let terms = bound.cdf_all(x);
                        let dev: Vec<f64> = terms.iter().map(|t| t - emp).collect();
                        (x, emp, ecdf.std_error(x), terms, dev)
                    })
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };

    let text = match args.format {
        Format::Json => {
            let mut doc = json!({
                "dist": args.dist.to_string(),
                "test": kind.token(),
                "sizes": sizes,
                "reps": args.reps,
                "seed": args.seed,
                "degenerate": ecdf.degenerate(),
            });
            if let Some(rows) = &compare {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|(x, emp, se, terms, dev)| {
                        json!({"x": x, "empirical": emp, "std_error": se, "terms": terms, "deviation": dev})
                    })
                    .collect();
                doc["compare"] = json!({"order": args.order, "rows": rows});
            }
            pretty(&doc)
        }
        Format::Csv | Format::Text => {
            let sep = if args.format == Format::Csv { "," } else { "\t" };
            let Some(rows) = &compare else {
                return Err(Failure::Config("csv and text output need --compare".into()));
            };
            let mut cols = vec!["x".to_string(), "empirical".into(), "std_error".into()];
            cols.extend((0..=args.order).map(|t| format!("term{t}")));
            cols.extend((0..=args.order).map(|t| format!("dev{t}")));
            let mut out = cols.join(sep);
            out.push('\n');
            for (x, emp, se, terms, dev) in rows {
                let mut cells = vec![x.to_string(), emp.to_string(), se.to_string()];
                cells.extend(terms.iter().chain(dev).map(|v| format!("{v:.8}")));
                writeln!(out, "{}", cells.join(sep)).unwrap();
            }
            out
        }
    };
    emit(&text, args.output.as_deref())
}
