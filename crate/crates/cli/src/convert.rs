//! `convert`: quaternion to rotation matrix and back.

use std::io::Read;

use quatham::so3::{matrix_to_quat_with_pivot, quat_to_matrix};
use quatham::{Matrix3, Quaternion, RotationMatrix};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Direction {
    #[value(name = "quat2mat")]
    QuatToMat,
    #[value(name = "mat2quat")]
    MatToQuat,
}

/// Whitespace- or comma-separated reals; lines starting with `#` are skipped.
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse `{t}` as a real number")))
        })
        .collect()
}

fn fmt_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn convert(direction: Direction, values: &[f64]) -> Result<String, CliError> {
    let expect = match direction {
        Direction::QuatToMat => 4,
        Direction::MatToQuat => 9,
    };
    if values.len() != expect {
        return Err(CliError::Usage(format!(
            "expected {expect} values, got {}",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Usage(format!("non-finite input {v}")));
    }
    match direction {
        Direction::QuatToMat => {
            let q = Quaternion::from_array([values[0], values[1], values[2], values[3]]);
            let m = quat_to_matrix(q).map_err(|e| CliError::Geometry(e.to_string()))?;
            let rows: Vec<String> = m.matrix().0.iter().map(|r| fmt_row(r)).collect();
            Ok(rows.join("\n") + "\n")
        }
        Direction::MatToQuat => {
            let mut a = [0.0; 9];
            a.copy_from_slice(values);
            let r = RotationMatrix::new(Matrix3::from_row_slice(&a))
                .map_err(|e| CliError::Geometry(e.to_string()))?;
            let mq = matrix_to_quat_with_pivot(&r);
            Ok(format!("{}\n# pivot {}\n", fmt_row(&mq.quat.to_array()), mq.pivot))
        }
    }
}

pub fn cmd_convert(direction: Direction, args: &[String]) -> Result<(), CliError> {
    let text = if args.is_empty() {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Usage(format!("cannot read stdin: {e}")))?;
        buf
    } else {
        args.join(" ")
    };
    let values = parse_values(&text)?;
    print!("{}", convert(direction, &values)?);
    Ok(())
}
