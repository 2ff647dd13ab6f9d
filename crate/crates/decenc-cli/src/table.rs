//! Result-table emission. The CSV column order is a stable interface:
//! `K,R,p,q,W,algorithm,C1_measured,C2_measured,cost_measured,C1_predicted,
//! C2_predicted,c1_lowerbound,c2_lowerbound,verified`.

use crate::runner::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

pub const CSV_HEADER: &str = "K,R,p,q,W,algorithm,C1_measured,C2_measured,cost_measured,C1_predicted,C2_predicted,c1_lowerbound,c2_lowerbound,verified";

pub fn emit_table(rows: &[Row], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for row in rows {
                let r = row.r.map(|v| v.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{:.6},{},{},{},{},{}\n",
                    row.k,
                    r,
                    row.p,
                    row.q,
                    row.w,
                    row.algorithm,
                    row.c1_measured,
                    row.c2_measured,
                    row.cost_measured,
                    row.c1_predicted,
                    row.c2_predicted,
                    row.c1_lowerbound,
                    row.c2_lowerbound,
                    row.verified
                ));
            }
            out
        }
        Format::JsonLines => {
            let mut out = String::new();
            for row in rows {
                let r = row
                    .r
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "null".into());
                out.push_str(&format!(
                    "{{\"K\":{},\"R\":{},\"p\":{},\"q\":{},\"W\":{},\"algorithm\":\"{}\",\"C1_measured\":{},\"C2_measured\":{},\"cost_measured\":{:.6},\"C1_predicted\":{},\"C2_predicted\":{},\"c1_lowerbound\":{},\"c2_lowerbound\":{},\"verified\":{}}}\n",
                    row.k,
                    r,
                    row.p,
                    row.q,
                    row.w,
                    row.algorithm,
                    row.c1_measured,
                    row.c2_measured,
                    row.cost_measured,
                    row.c1_predicted,
                    row.c2_predicted,
                    row.c1_lowerbound,
                    row.c2_lowerbound,
                    row.verified
                ));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> Row {
        Row {
            k: 16,
            r: None,
            p: 1,
            q: 13,
            w: 1,
            algorithm: "universal",
            c1_measured: 4,
            c2_measured: 6,
            cost_measured: 28.0,
            c1_predicted: 4,
            c2_predicted: 6,
            c1_lowerbound: 4,
            c2_lowerbound: 5,
            verified: true,
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(emit_table(&[], Format::Csv), format!("{CSV_HEADER}\n"));
        assert_eq!(emit_table(&[], Format::JsonLines), "");
    }

    #[test]
    fn one_row_csv() {
        let text = emit_table(&[sample_row()], Format::Csv);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("16,,1,13,1,universal,4,6,28.000000,4,6,4,5,true")
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn json_lines_keys_match_columns() {
        let text = emit_table(&[sample_row()], Format::JsonLines);
        assert!(text.starts_with("{\"K\":16,\"R\":null,"));
        assert!(text.contains("\"cost_measured\":28.000000"));
        assert!(text.trim_end().ends_with("\"verified\":true}"));
    }
}
