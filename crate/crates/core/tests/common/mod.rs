#![allow(dead_code)]

//! Table generators and independent reference computations shared by the
//! integration tests.

use prefix_reorder::render::fragment;
use prefix_reorder::{RequestSchedule, Table, Tokenizer};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn field_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("f{i}")).collect()
}

/// First field all distinct, the remaining `m − 1` fields constant.
pub fn distinct_then_constants(n: usize, m: usize) -> Table {
    let rows = (0..n)
        .map(|r| {
            let mut row = vec![format!("u{r}")];
            row.extend((1..m).map(|_| "c".to_string()));
            row
        })
        .collect();
    Table::new(field_names(m), rows).unwrap()
}

/// `m·x` rows; field `i` holds one shared value on rows `i·x .. (i+1)·x` and
/// distinct values everywhere else, so the groups never overlap.
pub fn staggered_groups(m: usize, x: usize) -> Table {
    let n = m * x;
    let rows = (0..n)
        .map(|r| {
            (0..m)
                .map(|f| if r / x == f { "g".to_string() } else { format!("u{r}") })
                .collect()
        })
        .collect();
    Table::new(field_names(m), rows).unwrap()
}

/// Cells are strings over {a, b} with length 1..=3.
pub fn random_ab_table(rng: &mut StdRng, n: usize, m: usize) -> Table {
    let rows = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let len = rng.random_range(1..=3);
                    (0..len).map(|_| if rng.random_bool(0.5) { 'a' } else { 'b' }).collect()
                })
                .collect()
        })
        .collect();
    Table::new(field_names(m), rows).unwrap()
}

/// Random table up to 4 rows x 3 fields as used by the exactness checks.
pub fn random_small_table(rng: &mut StdRng) -> Table {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(1..=3);
    random_ab_table(rng, n, m)
}

/// Field `f1` takes values from a small pool; every other field is an
/// injective function of it, so all fields are pairwise bidirectionally
/// dependent.
pub fn fd_determined_table(rng: &mut StdRng, n: usize, m: usize) -> Table {
    let pool = rng.random_range(1..=3);
    let suffixes: Vec<Vec<String>> = (0..m)
        .map(|_| {
            (0..pool)
                .map(|k| {
                    let len = rng.random_range(0..=2);
                    let pad: String = (0..len).map(|_| 'z').collect();
                    format!("{k}{pad}")
                })
                .collect()
        })
        .collect();
    let rows = (0..n)
        .map(|_| {
            let k = rng.random_range(0..pool);
            (0..m).map(|f| suffixes[f][k].clone()).collect()
        })
        .collect();
    Table::new(field_names(m), rows).unwrap()
}

/// Wide table shaped like a music-score metadata dump: ids, flags, small
/// integers, repeated long descriptions and high-cardinality measurements.
pub fn metadata_like(rng: &mut StdRng, n: usize, m: usize) -> Table {
    let descriptions: Vec<String> = (0..200)
        .map(|i| {
            let words = rng.random_range(6..14);
            let body: Vec<String> = (0..words).map(|w| format!("w{}", (i * 31 + w * 7) % 97)).collect();
            format!("Score {i}: {}", body.join(" "))
        })
        .collect();
    let flags = ["True", "False", "NA", "unknown", "partial"];
    let rows = (0..n)
        .map(|r| {
            (0..m)
                .map(|f| match f % 5 {
                    0 => format!("./data/{:03}/{r:06}.json", r % 1000),
                    1 => flags[rng.random_range(0..flags.len())].to_string(),
                    2 => rng.random_range(0..500).to_string(),
                    3 => descriptions[rng.random_range(0..descriptions.len())].clone(),
                    _ => format!("{:.4}", rng.random::<f64>() * 1000.0),
                })
                .collect()
        })
        .collect();
    Table::new(field_names(m), rows).unwrap()
}

/// A movie-review-like table: a long description repeated across reviews
/// of the same movie, a two-valued flag and a unique review text.
pub fn movies_like(rng: &mut StdRng, n: usize, movies: usize) -> Table {
    let infos: Vec<String> = (0..movies)
        .map(|i| format!("Movie {i} follows a protagonist through a long and winding plot number {i}."))
        .collect();
    let rows = (0..n)
        .map(|r| {
            let movie = rng.random_range(0..movies);
            vec![
                format!("review text {r}"),
                if rng.random_bool(0.5) { "Fresh" } else { "Rotten" }.to_string(),
                format!("Title {movie}"),
                infos[movie].clone(),
            ]
        })
        .collect();
    Table::new(
        vec!["review_content".into(), "review_type".into(), "movie_title".into(), "movie_info".into()],
        rows,
    )
    .unwrap()
}

/// Straightforward re-statement of the objective: walk positions while the
/// rendered fragments of consecutive rows are identical strings.
pub fn naive_phc(s: &RequestSchedule, t: &Table, tok: &dyn Tokenizer) -> u64 {
    let rendered: Vec<Vec<String>> = s
        .entries
        .iter()
        .map(|e| e.field_order.iter().map(|&f| fragment(t.field_name(f), t.cell(e.row_id, f))).collect())
        .collect();
    let mut total = 0u64;
    for r in 1..rendered.len() {
        let mut c = 0;
        while c < rendered[r].len() && c < rendered[r - 1].len() && rendered[r][c] == rendered[r - 1][c] {
            let l = tok.count(&rendered[r][c]) as u64;
            total += l * l;
            c += 1;
        }
    }
    total
}

/// Random complete schedule: shuffled rows, shuffled per-row field orders.
pub fn random_schedule(rng: &mut StdRng, t: &Table) -> RequestSchedule {
    use rand::seq::SliceRandom;
    let mut rows: Vec<usize> = (0..t.num_rows()).collect();
    rows.shuffle(rng);
    RequestSchedule::new(
        rows.into_iter()
            .map(|r| {
                let mut order: Vec<usize> = (0..t.num_fields()).collect();
                order.shuffle(rng);
                prefix_reorder::ScheduleEntry::new(r, order)
            })
            .collect(),
    )
}
