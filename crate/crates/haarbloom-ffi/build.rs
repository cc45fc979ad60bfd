//! Regenerates the committed C header whenever the exported surface changes.

use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let header_path = crate_dir.join("include").join("haarbloom.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config =
        cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml parses");
    let mut generated = Vec::new();
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation succeeds")
        .write(&mut generated);

    // Only touch the committed file on real changes so incremental builds
    // stay quiet.
    let current = fs::read(&header_path).unwrap_or_default();
    if current != generated {
        fs::create_dir_all(header_path.parent().unwrap()).unwrap();
        fs::write(&header_path, generated).expect("header is writable");
    }
}
