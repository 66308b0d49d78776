//! The command-line front end driven in-process, the same way the
//! `dyadic-bellman` binary runs it.
//!
//! cargo run --example cli

use dyadic_bellman::cli::run;

fn main() {
    let commands: [&[&str]; 5] = [
        &["eval", "omega", "--p", "2", "--tau", "0.75"],
        &[
            "eval", "bellman3", "--p", "2", "--q", "1.5", "--f", "1", "--A", "1.2", "--format",
            "json",
        ],
        &[
            "extremize",
            "--p",
            "2",
            "--q",
            "1.5",
            "--f",
            "1",
            "--A",
            "1.2",
            "--ks",
            "4,16",
        ],
        &[
            "sweep", "--q", "1.5", "--tau", "0.75", "--alphas", "0.1,0.01",
        ],
        &[
            "extremize",
            "--p",
            "2",
            "--q",
            "1.5",
            "--f",
            "1",
            "--A",
            "0.9",
        ],
    ];
    for args in commands {
        println!("$ dyadic-bellman {}", args.join(" "));
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("dyadic-bellman").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        print!(
            "{}{}",
            String::from_utf8_lossy(&out),
            String::from_utf8_lossy(&err)
        );
        println!("(exit {code})\n");
    }
}
