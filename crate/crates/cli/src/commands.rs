use std::io::Write;

use choicert::certificate::{certify_with_tol, CertificateReport};
use choicert::linalg::{LabeledOperator, Ordering};
use choicert::paperbench::{self, SearchDims, COUNTEREXAMPLE_SIGMA};
use choicert::solver::{solve as run_solver, MethodChoice, SolverOptions};

use crate::instance::InstanceFile;
use crate::{
    tolerance, CertifyArgs, CliError, SearchArgs, SolveArgs, VerifyArgs, EXIT_INTERNAL,
    EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VIOLATED,
};

/// Shortest readable form: 12 significant decimals, trailing zeros trimmed,
/// tiny values shown as `0`, typographic minus.
pub fn fmt_num(v: f64) -> String {
    if v.abs() < 1e-15 {
        return "0".into();
    }
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.replacen('-', "−", 1)
}

fn fmt_list(vs: &[f64]) -> String {
    vs.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" ")
}

fn io(e: std::io::Error) -> CliError {
    CliError::Internal(format!("write failed: {e}"))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn write_operator(out: &mut dyn Write, name: &str, op: &LabeledOperator) -> Result<(), CliError> {
    let labels = op.label_names().join(", ");
    if op.is_diagonal(0.0) {
        return writeln!(
            out,
            "{name} on [{labels}]: diag({})",
            fmt_list(&op.real_diagonal()).replace(' ', ", ")
        )
        .map_err(io);
    }
    writeln!(out, "{name} on [{labels}]:").map_err(io)?;
    let m = op.matrix();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| {
                let z = m[(i, j)];
                if z.im.abs() < 1e-15 {
                    fmt_num(z.re)
                } else {
                    format!(
                        "{}{}{}i",
                        fmt_num(z.re),
                        if z.im < 0.0 { "−" } else { "+" },
                        fmt_num(z.im.abs())
                    )
                }
            })
            .collect();
        writeln!(out, "  [{}]", row.join(", ")).map_err(io)?;
    }
    Ok(())
}

fn ordering_text(o: Ordering) -> &'static str {
    match o {
        Ordering::Greater => "H ⪰ lift",
        Ordering::Less => "lift ⪰ H",
        Ordering::Equal => "H = lift",
        Ordering::Incomparable => "neither H ⪰ lift nor lift ⪰ H",
    }
}

fn write_certificate(out: &mut dyn Write, r: &CertificateReport) -> Result<(), CliError> {
    if let Some(d) = &r.delta {
        write_operator(out, "Δ", d)?;
    }
    if let Some(y) = &r.y {
        write_operator(out, "Y = sign(Δ)", y)?;
    }
    write_operator(out, "H", &r.h)?;
    write_operator(out, "Tr_Y(HX)", &r.traced)?;
    writeln!(
        out,
        "Tr_Y(HX) Hermitian: {} (asymmetry {})",
        r.hermitian.is_hermitian,
        fmt_num(r.hermitian.max_asymmetry)
    )
    .map_err(io)?;
    write_operator(out, "lift", &r.lift)?;
    writeln!(
        out,
        "H − lift eigenvalues: {}",
        fmt_list(&r.difference_eigenvalues)
    )
    .map_err(io)?;
    writeln!(out, "order: {}", ordering_text(r.order.ordering)).map_err(io)?;
    writeln!(
        out,
        "conditions {}",
        if r.satisfied { "satisfied" } else { "violated" }
    )
    .map_err(io)
}

pub fn verify_paper(args: &VerifyArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let report = match args.perturb_sigma {
        None => paperbench::verify_paper()?,
        Some(d) => {
            let mut s = COUNTEREXAMPLE_SIGMA;
            s[0] += d;
            s[1] -= d;
            paperbench::verify_with_sigma(s)?
        }
    };
    let code = if report.theorem_confirmed {
        EXIT_OK
    } else {
        EXIT_INTERNAL
    };
    if args.json {
        writeln!(out, "{}", json(&report)).map_err(io)?;
        return Ok(code);
    }
    writeln!(out, "basis order: {}", report.basis_order).map_err(io)?;
    for s in &report.stages {
        writeln!(
            out,
            "({}) {:4}  {}  [residual {:.1e}]",
            s.id,
            if s.passed { "ok" } else { "FAIL" },
            s.description,
            s.residual
        )
        .map_err(io)?;
    }
    writeln!(out, "H eigenvalues: {}", fmt_list(&report.h_eigenvalues)).map_err(io)?;
    writeln!(
        out,
        "H − lift eigenvalues: {}",
        fmt_list(&report.certificate.difference_eigenvalues)
    )
    .map_err(io)?;
    writeln!(
        out,
        "optimal value: {} (closed form), {} (first-order), dual bound {}; sign(Δ) bound {}",
        fmt_num(report.optimal_value_fast_path),
        fmt_num(report.optimal_value_solver),
        fmt_num(report.dual_certificate_value),
        fmt_num(report.sign_candidate_value)
    )
    .map_err(io)?;
    match &report.failing_stage {
        Some(id) => writeln!(out, "NOT CONFIRMED: stage ({id}) failed").map_err(io)?,
        None if report.theorem_confirmed => writeln!(
            out,
            "confirmed: X is optimal and violates the conditions in both orders"
        )
        .map_err(io)?,
        None => writeln!(out, "NOT CONFIRMED: conditions unexpectedly hold").map_err(io)?,
    }
    Ok(code)
}

pub fn certify(args: &CertifyArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let tol = tolerance()?;
    let loaded = InstanceFile::read(&args.file)?.load(tol)?;
    let x = loaded
        .x
        .ok_or_else(|| CliError::Input("instance has no `x` to certify".into()))?;
    let report = certify_with_tol(&loaded.instance, &x, tol)?;
    if args.json {
        writeln!(out, "{}", json(&report)).map_err(io)?;
    } else {
        write_certificate(out, &report)?;
    }
    Ok(if report.satisfied {
        EXIT_OK
    } else {
        EXIT_VIOLATED
    })
}

pub fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    if !(args.eps > 0.0 && args.eps.is_finite()) {
        return Err(CliError::Input(format!(
            "--eps must be positive, got {}",
            args.eps
        )));
    }
    let tol = tolerance()?;
    let file = InstanceFile::read(&args.file)?;
    let loaded = file.load(tol)?;
    let opts = SolverOptions {
        max_iters: args.max_iters as usize,
        eps: args.eps,
        method: if args.first_order {
            MethodChoice::FirstOrder
        } else {
            MethodChoice::Auto
        },
        ..SolverOptions::default()
    };
    let result = run_solver(&loaded.instance, &opts)?;
    if let Some(path) = &args.out {
        let inst = &loaded.instance;
        let written =
            InstanceFile::from_operators(inst.rho(), inst.sigma(), Some(result.x_opt.op()))?;
        std::fs::write(path, written.to_json() + "\n")
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
    }
    if args.json {
        writeln!(out, "{}", json(&result)).map_err(io)?;
    } else {
        let method = serde_json::to_value(result.method).expect("enum serializes");
        writeln!(out, "method: {}", method.as_str().unwrap_or_default()).map_err(io)?;
        writeln!(out, "value: {}", fmt_num(result.primal_value)).map_err(io)?;
        writeln!(out, "dual bound: {}", fmt_num(result.dual_bound)).map_err(io)?;
        writeln!(out, "gap: {:.3e}", result.gap).map_err(io)?;
        writeln!(out, "iterations: {}", result.iterations).map_err(io)?;
        writeln!(out, "converged: {}", result.converged).map_err(io)?;
        write_operator(out, "x", result.x_opt.op())?;
    }
    Ok(if result.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

pub fn search(args: &SearchArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let dims = SearchDims {
        z: args.dim_z as usize,
        y: args.dim_y as usize,
    };
    let records = paperbench::search(args.trials as usize, args.seed, dims)?;
    let violations = records.iter().filter(|r| r.violation).count();
    let errors = records.iter().filter(|r| r.error.is_some()).count();
    let text = serde_json::to_string_pretty(&records).expect("records serialize") + "\n";
    let summary = format!(
        "violations: {violations} of {} trials ({errors} errors)",
        records.len()
    );
    match &args.out {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
            writeln!(out, "{summary}").map_err(io)?;
        }
        None => {
            write!(out, "{text}").map_err(io)?;
            eprintln!("{summary}");
        }
    }
    Ok(EXIT_OK)
}
