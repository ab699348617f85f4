//! Writes `fixtures/review/snapshot.json`: twenty pull requests for
//! exercising `reviewloop review --dry-run` against the fixture host.

use std::path::PathBuf;

use reviewloop_bot::host::{ChangedFile, FileStatus, FixturePr, HostSnapshot};
use reviewloop_core::Instant;

const REPO_COUNT: usize = 5;

fn source(path: &str, seed: usize) -> String {
    let ext = path.rsplit('.').next().unwrap_or("");
    let body = |comment: &str, f: &dyn Fn(usize) -> String| {
        let mut s = format!("{comment} {path}\n");
        for i in 0..(6 + seed % 9) {
            s.push_str(&f(i));
            s.push('\n');
        }
        s
    };
    match ext {
        "py" => body("#", &|i| {
            format!("def handler_{i}(x):\n    return x * {}\n", i + seed)
        }),
        "js" | "ts" | "jsx" => body("//", &|i| {
            format!(
                "export function handler{i}(x) {{ return x * {}; }}",
                i + seed
            )
        }),
        "java" => body("//", &|i| {
            format!(
                "class Handler{i} {{ int apply(int x) {{ return x * {}; }} }}",
                i + seed
            )
        }),
        "rs" => body("//", &|i| {
            format!("pub fn handler_{i}(x: i64) -> i64 {{ x * {} }}", i + seed)
        }),
        "go" => body("//", &|i| {
            format!("func Handler{i}(x int) int {{ return x * {} }}", i + seed)
        }),
        "c" | "cpp" | "h" => body("//", &|i| {
            format!("int handler_{i}(int x) {{ return x * {}; }}", i + seed)
        }),
        "sql" => body("--", &|i| {
            format!("SELECT id, score * {} FROM results_{i};", i + seed)
        }),
        "md" => body("#", &|i| format!("- step {i}: run the tests")),
        _ => body("#", &|i| format!("value_{i} = {}", i + seed)),
    }
}

fn code(path: &str, seed: usize) -> ChangedFile {
    let content = source(path, seed);
    ChangedFile {
        path: path.into(),
        status: if seed.is_multiple_of(3) {
            FileStatus::Added
        } else {
            FileStatus::Modified
        },
        additions: content.lines().count() as u64,
        deletions: (seed % 5) as u64,
        content: Some(content),
        patch: None,
    }
}

fn binary(path: &str) -> ChangedFile {
    ChangedFile {
        path: path.into(),
        status: FileStatus::Added,
        additions: 0,
        deletions: 0,
        content: None,
        patch: None,
    }
}

fn removed(path: &str) -> ChangedFile {
    ChangedFile {
        path: path.into(),
        status: FileStatus::Removed,
        additions: 0,
        deletions: 12,
        content: None,
        patch: None,
    }
}

fn main() {
    let layouts: Vec<Vec<ChangedFile>> = vec![
        vec![code("src/app.py", 1)],
        vec![
            code("src/components/Form.js", 2),
            code("src/pages/Submit.js", 3),
        ],
        vec![code("src/main/java/app/Service.java", 4)],
        vec![
            code("src/lib.rs", 5),
            code("src/parser.rs", 6),
            code("README.md", 7),
        ],
        vec![code("cmd/server/main.go", 8)],
        vec![binary("assets/logo.png")],
        vec![code("src/util.c", 9), code("include/util.h", 10)],
        vec![code("web/src/api.ts", 11), removed("web/src/legacy.ts")],
        vec![code("db/migrations/0003_scores.sql", 12)],
        vec![binary("release/build.zip")],
        vec![
            code("analysis/clean.py", 13),
            code("analysis/plot.py", 14),
            code("analysis/stats.py", 15),
            code("analysis/io.py", 16),
        ],
        vec![code("src/App.jsx", 17)],
        vec![code("engine/render.cpp", 18)],
        vec![binary("docs/report.pdf")],
        vec![code("scripts/deploy.sh", 19)],
        vec![
            code("config/settings.yml", 20),
            code("backend/views.py", 21),
        ],
        vec![code("src/index.js", 22)],
        vec![
            code("pkg/store/store.go", 23),
            code("pkg/store/store_test.go", 24),
        ],
        vec![code("src/Main.java", 25), removed("src/icon.png")],
        vec![code("notebooks/helpers.py", 26)],
    ];
    let base = Instant::parse("2024-04-08T00:30:00Z").unwrap();
    let pull_requests = layouts
        .into_iter()
        .enumerate()
        .map(|(i, files)| FixturePr {
            repo: format!("cohort-2024/team-{:02}", i % REPO_COUNT + 1),
            number: (i / REPO_COUNT + 1) as u64 * 10 + i as u64,
            head_sha: Some(format!("{:040x}", 0xabc000 + i)),
            created_at: Some(base.plus_seconds(i as i64 * 86_400 + 3_600)),
            author: Some(format!("student{:02}", i + 1)),
            files,
            comments: vec![],
            commits: vec![],
        })
        .collect();
    let snapshot = HostSnapshot { pull_requests };
    let out = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/review/snapshot.json");
    std::fs::create_dir_all(out.parent().unwrap()).unwrap();
    std::fs::write(
        &out,
        serde_json::to_string_pretty(&snapshot).unwrap() + "\n",
    )
    .unwrap();
    println!("{}", out.display());
}
