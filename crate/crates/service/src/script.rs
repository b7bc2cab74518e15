//! Line-oriented sculpting scripts for headless runs.
//!
//! One command per line; `#` starts a comment. Tokens are shell-quoted.
//!
//! ```text
//! partition h|v ATTR          unpartition h|v ATTR
//! peek ATTR                   clear-peek
//! select h|v CAT...           select+ h|v CAT...      (CAT or ATTR=CAT)
//! select cell ATTR=CAT...     select+ cell ATTR=CAT...
//! project                     prune                   pile [NAME]
//! prune-freq ATTR MIN_COUNT
//! links on|off                arrows on|off
//! sort ATTR alphabetical|numerical|explicit CAT...
//! bins ATTR COUNT             edges ATTR EDGE...      kind ATTR nominal|quantitative
//! undo                        redo                    use SUBSTRATE_ID
//! ```
//!
//! `project` switches the current substrate to the new one. Selections are
//! consumed by `project`, `prune` and `pile`.

use std::fs;
use std::path::Path;

use aqs_core::{
    Axis, Binning, ColumnKind, FacetKey, FacetValue, Selection, SelectionScope, Session, SortOrder,
    SubstrateId, ViewFlag, MAIN_SUBSTRATE,
};
use thiserror::Error;

use crate::svg;

#[derive(Debug, Error)]
#[error("line {line}: {message}\n  {text}")]
pub struct ScriptError {
    pub line: usize,
    pub text: String,
    pub message: String,
}

pub struct Runner {
    pub session: Session,
    pub current: SubstrateId,
    selection: Option<Selection>,
}

type Step = Result<(), String>;

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|_| format!("expected h or v, got `{s}`"))
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => Err(format!("expected on or off, got `{s}`")),
    }
}

fn parse_pair(s: &str) -> Option<(&str, &str)> {
    s.split_once('=')
}

fn want<'a>(args: &'a [String], n: usize, usage: &str) -> Result<&'a [String], String> {
    if args.len() < n {
        Err(format!("usage: {usage}"))
    } else {
        Ok(args)
    }
}

impl Runner {
    pub fn new(session: Session) -> Self {
        Runner {
            session,
            current: MAIN_SUBSTRATE,
            selection: None,
        }
    }

    pub fn run(&mut self, script: &str) -> Result<(), ScriptError> {
        for (i, text) in script.lines().enumerate() {
            let fail = |message: String| ScriptError {
                line: i + 1,
                text: text.trim().to_owned(),
                message,
            };
            let body = text.split_once('#').map_or(text, |(b, _)| b).trim();
            if body.is_empty() {
                continue;
            }
            let tokens = shlex::split(body).ok_or_else(|| fail("unbalanced quotes".into()))?;
            self.step(&tokens).map_err(fail)?;
        }
        Ok(())
    }

    fn step(&mut self, tokens: &[String]) -> Step {
        let (cmd, args) = tokens.split_first().ok_or("empty command")?;
        let sub = self.current;
        let s = &mut self.session;
        let err = |e: aqs_core::Error| e.to_string();
        match cmd.as_str() {
            "partition" | "unpartition" => {
                let a = want(args, 2, &format!("{cmd} h|v ATTR"))?;
                let axis = parse_axis(&a[0])?;
                if cmd == "partition" {
                    s.pivot_partition(sub, axis, &a[1]).map_err(err)
                } else {
                    s.unpartition(sub, axis, &a[1]).map_err(err)
                }
            }
            "peek" => s.peek(sub, &want(args, 1, "peek ATTR")?[0]).map_err(err),
            "clear-peek" => s.clear_peek(sub).map_err(err),
            "select" | "select+" => self.select(cmd == "select+", args),
            "project" => {
                let sel = self.selection.take().ok_or("nothing selected")?;
                self.current = self.session.project(sel).map_err(err)?;
                Ok(())
            }
            "prune" => {
                let sel = self.selection.take().ok_or("nothing selected")?;
                self.session.prune(sel).map_err(err)
            }
            "pile" => {
                let sel = self.selection.take().ok_or("nothing selected")?;
                let name = (!args.is_empty()).then(|| args.join(" "));
                self.session.pile(sel, name.as_deref()).map_err(err)
            }
            "prune-freq" => {
                let a = want(args, 2, "prune-freq ATTR MIN_COUNT")?;
                let min: usize = a[1].parse().map_err(|_| format!("bad count `{}`", a[1]))?;
                s.prune_by_frequency(sub, &a[0], min).map_err(err)
            }
            "links" | "arrows" => {
                let on = parse_switch(&want(args, 1, &format!("{cmd} on|off"))?[0])?;
                let flag = if cmd == "links" { ViewFlag::Links } else { ViewFlag::Arrows };
                s.set_view(sub, flag, on).map_err(err)
            }
            "sort" => {
                let a = want(args, 2, "sort ATTR alphabetical|numerical|explicit CAT...")?;
                let mut spec = s.state().spec(&a[0]).map_err(err)?.clone();
                spec.sort_order = match a[1].as_str() {
                    "alphabetical" => SortOrder::Alphabetical,
                    "numerical" => SortOrder::Numerical,
                    "explicit" => SortOrder::Explicit(a[2..].to_vec()),
                    other => return Err(format!("unknown sort order `{other}`")),
                };
                s.configure_attribute(spec).map_err(err)
            }
            "bins" => {
                let a = want(args, 2, "bins ATTR COUNT")?;
                let bins: usize = a[1].parse().map_err(|_| format!("bad bin count `{}`", a[1]))?;
                let mut spec = s.state().spec(&a[0]).map_err(err)?.clone();
                spec.binning = Some(Binning::EqualWidth { bins });
                s.configure_attribute(spec).map_err(err)
            }
            "edges" => {
                let a = want(args, 2, "edges ATTR EDGE...")?;
                let edges = a[1..]
                    .iter()
                    .map(|e| e.parse::<f64>().map_err(|_| format!("bad edge `{e}`")))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut spec = s.state().spec(&a[0]).map_err(err)?.clone();
                spec.binning = Some(Binning::ExplicitEdges { edges });
                s.configure_attribute(spec).map_err(err)
            }
            "kind" => {
                let a = want(args, 2, "kind ATTR nominal|quantitative")?;
                let mut spec = s.state().spec(&a[0]).map_err(err)?.clone();
                spec.kind = match a[1].as_str() {
                    "nominal" => ColumnKind::Nominal,
                    "quantitative" => ColumnKind::Quantitative,
                    other => return Err(format!("unknown kind `{other}`")),
                };
                if spec.kind == ColumnKind::Nominal {
                    spec.binning = None;
                }
                s.configure_attribute(spec).map_err(err)
            }
            "undo" | "redo" => {
                if cmd == "undo" {
                    s.undo().map_err(err)?;
                } else {
                    s.redo().map_err(err)?;
                }
                if s.substrate(self.current).is_err() {
                    self.current = MAIN_SUBSTRATE;
                }
                self.selection = None;
                Ok(())
            }
            "use" => {
                let id: SubstrateId = want(args, 1, "use SUBSTRATE_ID")?[0]
                    .parse()
                    .map_err(|_| format!("bad substrate id `{}`", args[0]))?;
                s.substrate(id).map_err(err)?;
                self.current = id;
                self.selection = None;
                Ok(())
            }
            other => Err(format!("unknown command `{other}`")),
        }
    }

    fn select(&mut self, extend: bool, args: &[String]) -> Step {
        let a = want(args, 2, "select h|v CAT... | select cell ATTR=CAT...")?;
        let sub = self.session.substrate(self.current).map_err(|e| e.to_string())?.clone();
        let new = if a[0] == "cell" {
            let mut key = FacetKey::default();
            for (axis, stack) in [(Axis::Horizontal, &sub.h_axis), (Axis::Vertical, &sub.v_axis)] {
                for attr in stack.iter() {
                    let cat = a[1..]
                        .iter()
                        .filter_map(|t| parse_pair(t))
                        .find(|(k, _)| k == attr)
                        .map(|(_, v)| v)
                        .ok_or_else(|| format!("cell needs a category for `{attr}`"))?;
                    let fv = FacetValue::new(attr.clone(), cat);
                    match axis {
                        Axis::Horizontal => key.horizontal.push(fv),
                        Axis::Vertical => key.vertical.push(fv),
                    }
                }
            }
            Selection::nodes(self.current, vec![key])
        } else {
            let axis = parse_axis(&a[0])?;
            let grid = self.session.grid(self.current).map_err(|e| e.to_string())?;
            let levels = grid.levels(axis);
            let facets = a[1..]
                .iter()
                .map(|t| {
                    if let Some((attr, cat)) = parse_pair(t) {
                        return Ok(FacetValue::new(attr, cat));
                    }
                    let owners: Vec<&str> = levels
                        .iter()
                        .filter(|l| l.labels.iter().any(|c| c == t))
                        .map(|l| l.attribute.as_str())
                        .collect();
                    match owners[..] {
                        [attr] => Ok(FacetValue::new(attr, t.as_str())),
                        [] => Err(format!("no category `{t}` on the {axis} axis")),
                        _ => Err(format!("category `{t}` is ambiguous; write ATTR={t}")),
                    }
                })
                .collect::<Result<Vec<_>, String>>()?;
            Selection::facets(self.current, axis, facets)
        };
        self.selection = Some(match (extend, self.selection.take()) {
            (true, Some(mut old)) if old.substrate == new.substrate => {
                match (&mut old.scope, new.scope) {
                    (SelectionScope::Nodes { keys }, SelectionScope::Nodes { keys: more }) => keys.extend(more),
                    (SelectionScope::RowFacet { facets }, SelectionScope::RowFacet { facets: more })
                    | (SelectionScope::ColumnFacet { facets }, SelectionScope::ColumnFacet { facets: more }) => {
                        facets.extend(more)
                    }
                    _ => return Err("select+ must extend a selection of the same kind".into()),
                }
                old
            }
            _ => new,
        });
        Ok(())
    }
}

/// Writes layout JSON, SVG and CSV per substrate plus the session log.
pub fn write_outputs(session: &Session, dir: &Path, width: f64, height: f64) -> aqs_core::Result<()> {
    fs::create_dir_all(dir)?;
    for sub in session.substrates() {
        let stem = format!("substrate-{}", sub.id);
        let layout = session.layout(sub.id, width, height)?;
        fs::write(dir.join(format!("{stem}.layout.json")), serde_json::to_vec_pretty(&layout)?)?;
        fs::write(dir.join(format!("{stem}.svg")), svg::render(&layout))?;
        let out = fs::File::create(dir.join(format!("{stem}.csv")))?;
        session.write_csv(sub.id, std::io::BufWriter::new(out))?;
    }
    fs::write(dir.join("session.json"), serde_json::to_vec_pretty(&session.to_log())?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use aqs_core::{Column, Dataset};
    use std::sync::Arc;

    fn runner() -> Runner {
        let ds = Dataset::new(
            vec![
                Column::nominal("year", ["2015", "2016", "2017", "2016", "2019"]),
                Column::nominal("borough", ["Q", "M", "M", "B", "Q"]),
            ],
            None,
        )
        .unwrap();
        Runner::new(Session::new(Arc::new(ds)))
    }

    #[test]
    fn project_switches_current_substrate() {
        let mut r = runner();
        r.run("partition h year\nselect h 2016 2017 # recent\nselect+ h 2019\nproject\npartition v borough")
            .unwrap();
        assert_eq!(r.current, SubstrateId(1));
        let sub = r.session.substrate(SubstrateId(1)).unwrap();
        assert_eq!(sub.live.len(), 4);
        assert_eq!(sub.v_axis, ["borough"]);
    }

    #[test]
    fn errors_report_the_line() {
        let mut r = runner();
        let e = r.run("partition h year\n\nselect h 2030\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("2030"), "{}", e.message);
        let e = r.run("frobnicate").unwrap_err();
        assert_eq!(e.line, 1);
        let e = r.run("partition h 'year").unwrap_err();
        assert!(e.message.contains("quotes"));
    }

    #[test]
    fn cell_selection_and_pile() {
        let mut r = runner();
        r.run("partition h year\npartition v borough\nselect cell year=2016 borough=M\nprune").unwrap();
        assert_eq!(r.session.substrate(MAIN_SUBSTRATE).unwrap().pruned.as_slice(), [1]);
        r.run("select h 2015 2016\npile \"early years\"").unwrap();
        let grid = r.session.grid(MAIN_SUBSTRATE).unwrap();
        assert_eq!(grid.horizontal[0].labels[0], "early years");
    }
}
