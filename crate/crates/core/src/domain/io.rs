//! On-disk tournament layout: a JSON array of questions, a JSON array of
//! forecasters and one forecast per line in a JSON-lines file.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Forecast, Forecaster, Question, Tournament};
use crate::error::{Error, Result};

pub const QUESTIONS_FILE: &str = "questions.json";
pub const FORECASTS_FILE: &str = "forecasts.jsonl";
pub const FORECASTERS_FILE: &str = "forecasters.json";

fn parse_error(path: &Path, err: &serde_json::Error) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line: err.line(),
        message: err.to_string(),
    }
}

pub fn read_questions(path: &Path) -> Result<Vec<Question>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, &e))
}

pub fn read_forecasters(path: &Path) -> Result<Vec<Forecaster>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, &e))
}

/// Reads a JSON-lines forecast file. Blank lines are skipped.
pub fn read_forecasts(path: &Path) -> Result<Vec<Forecast>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(f);
    }
    Ok(out)
}

pub fn read_tournament(dir: &Path) -> Result<Tournament> {
    Ok(Tournament::new(
        read_questions(&dir.join(QUESTIONS_FILE))?,
        read_forecasters(&dir.join(FORECASTERS_FILE))?,
        read_forecasts(&dir.join(FORECASTS_FILE))?,
    ))
}

/// Writes the three data files into `dir`, creating it if needed.
pub fn write_tournament(dir: &Path, tournament: &Tournament) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(QUESTIONS_FILE))?);
    serde_json::to_writer_pretty(&mut w, tournament.questions())?;
    writeln!(w)?;
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join(FORECASTERS_FILE))?);
    serde_json::to_writer_pretty(&mut w, tournament.forecasters())?;
    writeln!(w)?;
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join(FORECASTS_FILE))?);
    for f in tournament.forecasts() {
        serde_json::to_writer(&mut w, f)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tests::{at, forecast, question};
    use crate::domain::ForecasterKind;

    #[test]
    fn round_trip_and_unknown_fields() {
        let dir = tempfile::tempdir().unwrap();
        let t = Tournament::new(
            vec![question("q1", 2, "2018-07-01", "2018-07-03")],
            vec![Forecaster {
                id: "a".into(),
                kind: ForecasterKind::Machine,
            }],
            vec![forecast("q1", "a", at("2018-07-02", 5), &[0.25, 0.75])],
        );
        write_tournament(dir.path(), &t).unwrap();
        let back = read_tournament(dir.path()).unwrap();
        assert_eq!(back.questions(), t.questions());
        assert_eq!(back.forecasters(), t.forecasters());
        assert_eq!(back.forecasts(), t.forecasts());

        let extra = r#"{"question_id":"q1","forecaster_id":"a","timestamp":"2018-07-02T05:00:00","probs":[0.5,0.5],"note":"ignored"}"#;
        fs::write(dir.path().join(FORECASTS_FILE), format!("{extra}\n\n{extra}\n")).unwrap();
        assert_eq!(read_forecasts(&dir.path().join(FORECASTS_FILE)).unwrap().len(), 2);
    }

    #[test]
    fn jsonl_error_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(FORECASTS_FILE);
        let good = r#"{"question_id":"q1","forecaster_id":"a","timestamp":"2018-07-02T05:00:00","probs":[0.5,0.5]}"#;
        fs::write(&path, format!("{good}\n{{oops\n")).unwrap();
        match read_forecasts(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
