//! Regenerates the shipped datasets under `fixtures/`.
//!
//! cargo run -p reviewloop-core --example gen_fixtures -- fixtures

use std::path::PathBuf;

use reviewloop_core::fixtures::{pr129, CohortFixture, PR129_REPO};
use reviewloop_core::telemetry::{write_dir, Dataset, TeamMap};
use reviewloop_core::CohortCalendar;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fixtures".into())
        .into();
    for fx in [CohortFixture::preset_2023(), CohortFixture::preset_2024()] {
        let dir = root.join(fx.label());
        write_dir(&dir, &fx.generate(), Some(&fx.team_map()))?;
        println!("wrote {}", dir.display());
    }
    let ds = Dataset {
        cohort: CohortCalendar::preset_2024(),
        prs: vec![pr129()],
    };
    let teams: TeamMap = [(PR129_REPO.to_string(), "Team-AA".to_string())].into();
    let dir = root.join("pr129");
    write_dir(&dir, &ds.to_rows(), Some(&teams))?;
    println!("wrote {}", dir.display());
    Ok(())
}
