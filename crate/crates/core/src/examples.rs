//! Bundled selection diagrams for the standard worked examples.

use crate::diagram::SelectionDiagram;

pub const FIG1A: &str = include_str!("../diagrams/fig1a.sd");
pub const FIG1B: &str = include_str!("../diagrams/fig1b.sd");
pub const FIG1C: &str = include_str!("../diagrams/fig1c.sd");
pub const FIG2: &str = include_str!("../diagrams/fig2.sd");
pub const SBOW: &str = include_str!("../diagrams/sbow.sd");
pub const FIG3B: &str = include_str!("../diagrams/fig3b.sd");
pub const FIG4: &str = include_str!("../diagrams/fig4.sd");
pub const SP: &str = include_str!("../diagrams/sp.sd");
pub const SB: &str = include_str!("../diagrams/sb.sd");

/// Every bundled diagram with its file stem.
pub const ALL: [(&str, &str); 9] = [
    ("fig1a", FIG1A),
    ("fig1b", FIG1B),
    ("fig1c", FIG1C),
    ("fig2", FIG2),
    ("sbow", SBOW),
    ("fig3b", FIG3B),
    ("fig4", FIG4),
    ("sp", SP),
    ("sb", SB),
];

/// Parses a bundled diagram by file stem.
pub fn diagram(name: &str) -> Option<SelectionDiagram> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| SelectionDiagram::parse(text).expect("bundled diagram parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_diagrams_parse() {
        for (name, _) in ALL {
            assert!(diagram(name).is_some(), "{name}");
        }
        assert!(diagram("nope").is_none());
    }
}
