use std::process::Command;

fn main() {
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/refs");
    println!("cargo:rerun-if-env-changed=ADRX_VERSION");
    let pkg = env!("CARGO_PKG_VERSION");
    let version = std::env::var("ADRX_VERSION").ok().unwrap_or_else(|| describe(pkg));
    println!("cargo:rustc-env=ADRX_VERSION={version}");
}

/// `git describe --tags` when a tag exists, else `v<pkg>-g<hash>`, with
/// `-dirty` for modified trees; plain `v<pkg>` outside a repository.
fn describe(pkg: &str) -> String {
    let out = Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty", "--abbrev=7"])
        .output();
    match out {
        Ok(o) if o.status.success() => {
            let d = String::from_utf8_lossy(&o.stdout).trim().to_string();
            if d.contains("-g") || d.starts_with('v') {
                d
            } else {
                format!("v{pkg}-g{d}")
            }
        }
        _ => format!("v{pkg}"),
    }
}
