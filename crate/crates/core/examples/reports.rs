//! Driving the command-line front end in-process and reading its report.

use calm_probe::cli;
use calm_probe::report::Report;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        ["calm-probe", "falsify", "--builtin", "example-4-4", "--samples", "500", "--seed", "1"],
        &mut out,
        &mut err,
    );
    let report = Report::parse(std::str::from_utf8(&out)?)?;
    println!("exit code {code}, verdict {}", report.get_result("verdict").unwrap_or("?"));
    for t in &report.tables {
        println!("table {} with columns {}", t.name, t.columns.join(", "));
    }
    print!("{}", report.to_csv().lines().take(6).collect::<Vec<_>>().join("\n"));
    println!();
    print!("{}", report.render().lines().take(12).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
