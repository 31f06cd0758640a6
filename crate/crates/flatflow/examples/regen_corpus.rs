//! Rewrites the committed corpus documents and reports from their
//! builders. Run after a deliberate format change, then commit the diff.

use std::fs;
use std::path::Path;

use flatflow::corpus;
use flatflow::format::{export_surface, parse_surface, surface_report};
use flatflow::surface::Tolerances;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    fs::create_dir_all(&dir).expect("create corpus directory");
    for name in corpus::NAMES {
        let surface = corpus::build(name).expect(name);
        let doc = export_surface(&surface);
        // The report is rendered from the parsed document so its cone
        // labels match what a consumer of the file sees.
        let canonical = parse_surface(&doc, Tolerances::default()).expect(name);
        fs::write(dir.join(format!("{name}.surf")), &doc).expect(name);
        fs::write(
            dir.join(format!("{name}.report")),
            surface_report(&canonical),
        )
        .expect(name);
        println!("wrote {name}");
    }
}
