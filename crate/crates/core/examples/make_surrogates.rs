//! Writes the seeded colon/ovarian stand-ins as CSV.
//!
//! cargo run -p crowdfs --example make_surrogates -- data/

#[path = "../tests/common/surrogate.rs"]
mod surrogate;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;
    for spec in [surrogate::COLON, surrogate::OVARIAN] {
        let ds = surrogate::generate(&spec);
        let path = dir.join(format!("{}_surrogate.csv", spec.name));
        ds.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("{} ({} x {})", path.display(), ds.n_samples(), ds.n_features());
    }
    Ok(())
}
