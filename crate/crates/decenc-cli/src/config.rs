//! Scenario config parsing: flat `key = value` stanzas separated by blank
//! lines, `#` comments allowed. Unknown keys are rejected with the offending
//! line number.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    Random,
    GrsSystematic,
    GrsNonSystematic,
    Lagrange,
    Dft,
    VandermondeGrid,
}

impl CodeKind {
    pub fn name(self) -> &'static str {
        match self {
            CodeKind::Random => "random",
            CodeKind::GrsSystematic => "grs-systematic",
            CodeKind::GrsNonSystematic => "grs-nonsystematic",
            CodeKind::Lagrange => "lagrange",
            CodeKind::Dft => "dft",
            CodeKind::VandermondeGrid => "vandermonde-grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKey {
    Universal,
    Structured,
    Cauchy,
    Auto,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// First line of the stanza, for diagnostics.
    pub line: usize,
    pub q: u64,
    pub k: usize,
    pub r: Option<usize>,
    pub p: usize,
    pub w: usize,
    pub alpha: f64,
    pub beta: f64,
    pub code: CodeKind,
    pub algorithm: AlgorithmKey,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub phi_table: Option<Vec<u64>>,
}

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Default)]
struct Stanza {
    line: usize,
    q: Option<u64>,
    k: Option<usize>,
    r: Option<usize>,
    p: Option<usize>,
    w: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    code: Option<CodeKind>,
    algorithm: Option<AlgorithmKey>,
    seed: Option<u64>,
    trials: Option<usize>,
    phi_table: Option<Vec<u64>>,
}

impl Stanza {
    fn is_empty(&self) -> bool {
        self.q.is_none()
            && self.k.is_none()
            && self.r.is_none()
            && self.code.is_none()
            && self.algorithm.is_none()
    }

    fn finish(self) -> Result<ScenarioConfig, ConfigError> {
        let line = self.line;
        Ok(ScenarioConfig {
            line,
            q: self
                .q
                .ok_or_else(|| err(line, "missing required key `q`"))?,
            k: self
                .k
                .ok_or_else(|| err(line, "missing required key `K`"))?,
            r: self.r,
            p: self.p.unwrap_or(1),
            w: self.w.unwrap_or(1),
            alpha: self.alpha.unwrap_or(1.0),
            beta: self.beta.unwrap_or(1.0),
            code: self
                .code
                .ok_or_else(|| err(line, "missing required key `code`"))?,
            algorithm: self.algorithm.unwrap_or(AlgorithmKey::Auto),
            seed: self.seed,
            trials: self.trials,
            phi_table: self.phi_table,
        })
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| err(line, format!("invalid value `{value}` for key `{key}`")))
}

/// Parses a whole config file into scenario stanzas.
pub fn parse_configs(text: &str) -> Result<Vec<ScenarioConfig>, ConfigError> {
    let mut out = Vec::new();
    let mut cur = Stanza::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur).finish()?);
            }
            cur = Stanza::default();
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(lineno, format!("expected `key = value`, got `{line}`")));
        };
        let key = key.trim();
        let value = value.trim();
        if cur.is_empty() && cur.line == 0 {
            cur.line = lineno;
        }
        match key {
            "q" => cur.q = Some(parse_num(lineno, key, value)?),
            "K" => cur.k = Some(parse_num(lineno, key, value)?),
            "R" => cur.r = Some(parse_num(lineno, key, value)?),
            "p" => cur.p = Some(parse_num(lineno, key, value)?),
            "W" => cur.w = Some(parse_num(lineno, key, value)?),
            "alpha" => cur.alpha = Some(parse_num(lineno, key, value)?),
            "beta" => cur.beta = Some(parse_num(lineno, key, value)?),
            "seed" => cur.seed = Some(parse_num(lineno, key, value)?),
            "trials" => cur.trials = Some(parse_num(lineno, key, value)?),
            "code" => {
                cur.code = Some(match value {
                    "random" => CodeKind::Random,
                    "grs-systematic" => CodeKind::GrsSystematic,
                    "grs-nonsystematic" => CodeKind::GrsNonSystematic,
                    "lagrange" => CodeKind::Lagrange,
                    "dft" => CodeKind::Dft,
                    "vandermonde-grid" => CodeKind::VandermondeGrid,
                    other => {
                        return Err(err(lineno, format!("unknown code `{other}`")));
                    }
                })
            }
            "algorithm" => {
                cur.algorithm = Some(match value {
                    "universal" => AlgorithmKey::Universal,
                    "structured" => AlgorithmKey::Structured,
                    "cauchy" => AlgorithmKey::Cauchy,
                    "auto" => AlgorithmKey::Auto,
                    other => {
                        return Err(err(lineno, format!("unknown algorithm `{other}`")));
                    }
                })
            }
            "phi-table" => {
                let mut table = Vec::new();
                for part in value.split(',') {
                    table.push(parse_num(lineno, key, part.trim())?);
                }
                cur.phi_table = Some(table);
            }
            other => {
                return Err(err(lineno, format!("unknown key `{other}`")));
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur.finish()?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_stanzas_with_defaults() {
        let text = "# comment\nq = 13\nK = 16\ncode = random\n\nq=13\nK=6\nR=6\np=2\ncode=vandermonde-grid\nalgorithm=structured\n";
        let configs = parse_configs(text).unwrap();
        assert_eq!(configs.len(), 2);
        assert_eq!(configs[0].p, 1);
        assert_eq!(configs[0].w, 1);
        assert_eq!(configs[0].r, None);
        assert_eq!(configs[1].r, Some(6));
        assert_eq!(configs[1].algorithm, AlgorithmKey::Structured);
    }

    #[test]
    fn unknown_key_names_the_key_and_line() {
        let e = parse_configs("q = 13\nK = 4\nbogus = 1\ncode = random\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("bogus"), "{}", e.message);
    }

    #[test]
    fn missing_required_key_is_reported() {
        let e = parse_configs("q = 13\ncode = random\n").unwrap_err();
        assert!(e.message.contains('K'), "{}", e.message);
    }

    #[test]
    fn phi_table_parses_csv_values() {
        let c = parse_configs("q=13\nK=6\ncode=vandermonde-grid\nphi-table = 1, 3\n").unwrap();
        assert_eq!(c[0].phi_table, Some(vec![1, 3]));
    }
}
