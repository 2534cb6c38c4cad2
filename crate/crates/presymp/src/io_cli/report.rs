//! Plain-text reports with a fixed section order, and CSV trajectories.

use std::fmt::Write;

use crate::moser::FlowResult;

pub const REPORT_VERSION: u32 = 1;

/// `key = value` records in insertion order, so equal inputs give
/// byte-identical output.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub settings: Vec<(String, String)>,
    pub results: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub seed: u64,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report { command: command.into(), seed, ..Default::default() }
    }

    pub fn setting(&mut self, key: &str, value: impl ToString) {
        self.settings.push((key.into(), value.to_string()));
    }

    pub fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.into(), value.to_string()));
    }

    pub fn warn(&mut self, msg: impl ToString) {
        self.warnings.push(msg.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.results.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = format!("presymp-report {REPORT_VERSION}\ncommand = {}\n", self.command);
        let block = |s: &mut String, title: &str, rows: &[(String, String)]| {
            let _ = writeln!(s, "[{title}]");
            for (k, v) in rows {
                let _ = writeln!(s, "{k} = {v}");
            }
        };
        block(&mut s, "settings", &self.settings);
        block(&mut s, "result", &self.results);
        s.push_str("[warnings]\n");
        for w in &self.warnings {
            let _ = writeln!(s, "- {w}");
        }
        block(
            &mut s,
            "provenance",
            &[("seed".into(), self.seed.to_string()), ("version".into(), concat!("presymp ", env!("CARGO_PKG_VERSION")).into())],
        );
        s
    }
}

/// One row per sample and time step: `sample,step,t,glued_t,x1,…`.
pub fn trajectory_csv(r: &FlowResult) -> String {
    let n = r.trajectories.first().and_then(|p| p.first()).map_or(0, Vec::len);
    let mut s = String::from("sample,step,t,glued_t");
    for i in 1..=n {
        let _ = write!(s, ",x{i}");
    }
    s.push('\n');
    for (k, path) in r.trajectories.iter().enumerate() {
        for (j, x) in path.iter().enumerate() {
            let _ = write!(s, "{k},{j},{:e},{:e}", r.times[j], r.glued_times[j]);
            for v in x {
                let _ = write!(s, ",{v:e}");
            }
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_ordered() {
        let mut r = Report::new("dims", 7);
        r.setting("N", 2);
        r.result("row.0", "m=0");
        r.warn("careful");
        let text = r.render();
        let expect = "presymp-report 1\ncommand = dims\n[settings]\nN = 2\n[result]\nrow.0 = m=0\n[warnings]\n- careful\n[provenance]\nseed = 7\n";
        assert!(text.starts_with(expect), "{text}");
        assert_eq!(r.get("row.0"), Some("m=0"));
    }
}
