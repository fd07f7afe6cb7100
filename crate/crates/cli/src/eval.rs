use std::collections::BTreeMap;
use std::path::Path;

use aed_core::LabeledScores;
use anyhow::{anyhow, bail, Context, Result};

/// Frame rows key on `frame_index`; tile rows add `(tile_row, tile_col)`.
type Key = (usize, Option<(usize, usize)>);

#[derive(Debug, Clone, Copy)]
struct Scored {
    score: f64,
    skipped: bool,
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let rows = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("malformed csv in {}", path.display()))?;
    Ok((header, rows))
}

fn column(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| anyhow!("{} has no `{name}` column", path.display()))
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = row.get(i).unwrap_or("");
    raw.parse().map_err(|_| anyhow!("row {line}: cannot parse `{raw}`"))
}

fn tile_columns(header: &[String], path: &Path) -> Result<Option<(usize, usize)>> {
    match (header.iter().any(|h| h == "tile_row"), header.iter().any(|h| h == "tile_col")) {
        (true, true) => Ok(Some((column(header, "tile_row", path)?, column(header, "tile_col", path)?))),
        (false, false) => Ok(None),
        _ => bail!("{} has only one of tile_row/tile_col", path.display()),
    }
}

fn read_scores(path: &Path) -> Result<BTreeMap<Key, Scored>> {
    let (header, rows) = read_table(path)?;
    let frame = column(&header, "frame_index", path)?;
    let score = column(&header, "score", path)?;
    let decision = column(&header, "decision", path)?;
    let tiles = tile_columns(&header, path)?;
    let mut out = BTreeMap::new();
    for (n, row) in rows.iter().enumerate() {
        let line = n + 2;
        let key = (field(row, frame, line)?, tiles.map(|(r, c)| Ok::<_, anyhow::Error>((field(row, r, line)?, field(row, c, line)?))).transpose()?);
        let value = Scored {
            score: field(row, score, line)?,
            skipped: row.get(decision) == Some("skipped"),
        };
        if out.insert(key, value).is_some() {
            bail!("{}: duplicate row for {key:?}", path.display());
        }
    }
    Ok(out)
}

fn read_labels(path: &Path) -> Result<BTreeMap<Key, bool>> {
    let (header, rows) = read_table(path)?;
    let frame = column(&header, "frame_index", path)?;
    let label = column(&header, "label", path)?;
    let tiles = tile_columns(&header, path)?;
    let mut out = BTreeMap::new();
    for (n, row) in rows.iter().enumerate() {
        let line = n + 2;
        let key = (field(row, frame, line)?, tiles.map(|(r, c)| Ok::<_, anyhow::Error>((field(row, r, line)?, field(row, c, line)?))).transpose()?);
        let positive = match row.get(label) {
            Some("1") => true,
            Some("0") => false,
            other => bail!("{} row {line}: label must be 0 or 1, got {other:?}", path.display()),
        };
        if out.insert(key, positive).is_some() {
            bail!("{}: duplicate label for {key:?}", path.display());
        }
    }
    Ok(out)
}

/// Collapses tile rows to one row per frame: max over scored tiles.
fn frame_level(scores: BTreeMap<Key, Scored>) -> BTreeMap<Key, Scored> {
    let mut out: BTreeMap<Key, Scored> = BTreeMap::new();
    for ((frame, _), s) in scores {
        let slot = out.entry((frame, None)).or_insert(Scored { score: 0.0, skipped: true });
        if !s.skipped {
            slot.score = if slot.skipped { s.score } else { slot.score.max(s.score) };
            slot.skipped = false;
        }
    }
    out
}

/// Joins score and label files. Tile scores against frame labels are
/// evaluated per frame; skipped rows are dropped unless
/// `skipped_as_negative`, which keeps them at score 0.
pub fn join(scores_path: &Path, labels_path: &Path, skipped_as_negative: bool) -> Result<LabeledScores> {
    let mut scores = read_scores(scores_path)?;
    let labels = read_labels(labels_path)?;
    let tile_scores = scores.keys().next().is_some_and(|k| k.1.is_some());
    let tile_labels = labels.keys().next().is_some_and(|k| k.1.is_some());
    if tile_scores && !tile_labels {
        scores = frame_level(scores);
    } else if tile_labels && !tile_scores {
        bail!("tile labels need tile scores; score with a pixel-level model");
    }
    if scores.len() != labels.len() || scores.keys().zip(labels.keys()).any(|(a, b)| a != b) {
        let missing = scores.keys().find(|k| !labels.contains_key(k));
        let extra = labels.keys().find(|k| !scores.contains_key(k));
        bail!(
            "score and label indices differ ({} scored rows, {} labels; first unlabeled {missing:?}, first unscored {extra:?})",
            scores.len(),
            labels.len()
        );
    }
    let (mut s, mut l) = (Vec::new(), Vec::new());
    for (key, scored) in &scores {
        if scored.skipped && !skipped_as_negative {
            continue;
        }
        s.push(if scored.skipped { 0.0 } else { scored.score });
        l.push(labels[key]);
    }
    Ok(LabeledScores::new(s, l)?)
}
