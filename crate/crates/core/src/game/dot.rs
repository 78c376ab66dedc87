use std::fmt::Write;

use num_traits::One;

use super::{Dist, Game};
use crate::rational::fmt_rational;

fn node_id(name: &str) -> String {
    let plain = !name.is_empty()
        && (name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !name.starts_with(|c: char| c.is_ascii_digit())
            || name.chars().all(|c| c.is_ascii_digit()));
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn edges(out: &mut String, from: &str, action: &str, dist: &Dist, names: &[String]) {
    for (t, p) in dist {
        let label = if p.is_one() {
            action.to_string()
        } else {
            format!("{action},{}", fmt_rational(p))
        };
        writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            node_id(from),
            node_id(&names[*t]),
            label.replace('"', "\\\"")
        )
        .unwrap();
    }
}

/// Graphviz rendering: circles for maximizer states (doubled when final,
/// bold when initial), boxes for minimizer states.
pub(super) fn export(g: &Game) -> String {
    let mut out = String::from("digraph game {\n  rankdir=LR;\n");
    for (s, name) in g.s1.iter().enumerate() {
        let shape = if g.finals[s] {
            "doublecircle"
        } else {
            "circle"
        };
        let bold = if s == g.initial { ", penwidth=2" } else { "" };
        writeln!(out, "  {} [shape={shape}{bold}];", node_id(name)).unwrap();
    }
    for name in &g.s2 {
        writeln!(out, "  {} [shape=box];", node_id(name)).unwrap();
    }
    for (s, row) in g.p1.iter().enumerate() {
        for (a, dist) in row.iter().enumerate() {
            edges(&mut out, &g.s1[s], &g.a1[a], dist, &g.s2);
        }
    }
    for (t, row) in g.p2.iter().enumerate() {
        for (b, dist) in row.iter().enumerate() {
            if let Some(dist) = dist {
                edges(&mut out, &g.s2[t], &g.a2[b], dist, &g.s1);
            }
        }
    }
    out.push_str("}\n");
    out
}
