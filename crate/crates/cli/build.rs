use std::env;
use std::process::Command;

fn main() {
    let rustc = env::var("RUSTC").unwrap_or_else(|_| "rustc".into());
    let version = Command::new(rustc)
        .arg("--version")
        .output()
        .ok()
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "rustc (unknown version)".into());
    println!("cargo:rustc-env=CALLCOST_RUSTC_VERSION={version}");
    for (key, var) in [
        ("CALLCOST_PROFILE", "PROFILE"),
        ("CALLCOST_OPT_LEVEL", "OPT_LEVEL"),
        ("CALLCOST_TARGET", "TARGET"),
    ] {
        println!(
            "cargo:rustc-env={key}={}",
            env::var(var).unwrap_or_else(|_| "unknown".into())
        );
    }
    println!("cargo:rerun-if-changed=build.rs");
}
