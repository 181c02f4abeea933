//! Rewrites `crates/cli/fixtures/` from the library constructors.

use std::path::Path;

fn main() -> marginalis::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    marginalis_cli::fixtures::write_all(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
