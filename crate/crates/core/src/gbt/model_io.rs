//! Plain-text model format.
//!
//! ```text
//! format_version=1
//! objective=logistic;scale_pos_weight=1;weighted_alpha=off;focal_gamma=off
//! base_margin=0
//! schema=3f2a9c0d11e4b7a8
//! n_features=4
//! n_trees=1
//! tree 0
//! 0:[f2<0.5] yes=1,no=2,missing=1
//! 1:leaf=-0.12
//! 2:leaf=0.3
//! ```
//!
//! Nodes are numbered in preorder. Floats are written in shortest round-trip
//! form, so saving and loading reproduces predictions bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{Ensemble, Objective, TreeNode};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

fn dump_tree(node: &TreeNode, next_id: &mut usize, out: &mut String) {
    let id = *next_id;
    *next_id += 1;
    match node {
        TreeNode::Leaf { weight } => {
            let _ = writeln!(out, "{id}:leaf={weight}");
        }
        TreeNode::Split {
            feature,
            threshold,
            default_left,
            left,
            right,
        } => {
            // children ids are known only after the left subtree is numbered
            let mut left_buf = String::new();
            let left_id = *next_id;
            dump_tree(left, next_id, &mut left_buf);
            let right_id = *next_id;
            let mut right_buf = String::new();
            dump_tree(right, next_id, &mut right_buf);
            let missing = if *default_left { left_id } else { right_id };
            let _ = writeln!(
                out,
                "{id}:[f{feature}<{threshold}] yes={left_id},no={right_id},missing={missing}"
            );
            out.push_str(&left_buf);
            out.push_str(&right_buf);
        }
    }
}

impl Ensemble {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format_version={MODEL_FORMAT_VERSION}");
        let _ = writeln!(out, "objective={}", self.objective.tag());
        let _ = writeln!(out, "base_margin={}", self.base_margin);
        let _ = writeln!(out, "schema={}", self.schema_fingerprint);
        let _ = writeln!(out, "n_features={}", self.n_features);
        let _ = writeln!(out, "n_trees={}", self.trees.len());
        for (i, tree) in self.trees.iter().enumerate() {
            let _ = writeln!(out, "tree {i}");
            let mut id = 0;
            dump_tree(tree, &mut id, &mut out);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Parser::new(text).ensemble()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

enum RawNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        yes: usize,
        no: usize,
        missing: usize,
    },
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate().peekable(),
        }
    }

    fn err(line: usize, message: impl Into<String>) -> Error {
        Error::ModelFormat {
            line: line + 1,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.lines
            .next()
            .ok_or_else(|| Error::ModelFormat {
                line: 0,
                message: "unexpected end of model".into(),
            })
    }

    fn header(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next_line()?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| Self::err(n, format!("expected `{key}=`")))?;
        Ok((n, value))
    }

    fn number<T: std::str::FromStr>(n: usize, s: &str, what: &str) -> Result<T> {
        s.parse().map_err(|_| Self::err(n, format!("bad {what} {s:?}")))
    }

    fn ensemble(mut self) -> Result<Ensemble> {
        let (n, v) = self.header("format_version")?;
        let version: u32 = Self::number(n, v, "format version")?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Self::err(n, format!("unsupported format version {version}")));
        }
        let (n, v) = self.header("objective")?;
        let objective = Objective::parse_tag(v).map_err(|e| Self::err(n, e.to_string()))?;
        let (n, v) = self.header("base_margin")?;
        let base_margin: f64 = Self::number(n, v, "base margin")?;
        let (_, schema) = self.header("schema")?;
        let (n, v) = self.header("n_features")?;
        let n_features: usize = Self::number(n, v, "feature count")?;
        let (n, v) = self.header("n_trees")?;
        let n_trees: usize = Self::number(n, v, "tree count")?;

        let mut trees = Vec::with_capacity(n_trees);
        for i in 0..n_trees {
            let (n, line) = self.next_line()?;
            if line != format!("tree {i}") {
                return Err(Self::err(n, format!("expected `tree {i}`")));
            }
            trees.push(self.tree(n, n_features)?);
        }
        if let Some((n, line)) = self.lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Self::err(n, format!("trailing content {line:?}")));
        }
        Ok(Ensemble {
            trees,
            base_margin,
            objective,
            schema_fingerprint: schema.to_string(),
            n_features,
        })
    }

    fn tree(&mut self, header_line: usize, n_features: usize) -> Result<TreeNode> {
        let mut nodes: Vec<(usize, RawNode)> = Vec::new();
        while let Some(&(n, line)) = self.lines.peek() {
            if line.starts_with("tree ") || line.trim().is_empty() {
                break;
            }
            self.lines.next();
            let (id, body) = line
                .split_once(':')
                .ok_or_else(|| Self::err(n, "expected `<id>:`"))?;
            let id: usize = Self::number(n, id, "node id")?;
            if id != nodes.len() {
                return Err(Self::err(n, format!("node id {id} out of order")));
            }
            let node = if let Some(w) = body.strip_prefix("leaf=") {
                RawNode::Leaf(Self::number(n, w, "leaf weight")?)
            } else {
                Self::split_node(n, body, n_features)?
            };
            nodes.push((n, node));
        }
        if nodes.is_empty() {
            return Err(Self::err(header_line, "tree has no nodes"));
        }
        let mut used = vec![false; nodes.len()];
        let root = assemble(&nodes, 0, &mut used)?;
        if let Some(orphan) = used.iter().position(|u| !u) {
            return Err(Self::err(nodes[orphan].0, "node is not reachable from the root"));
        }
        Ok(root)
    }

    fn split_node(n: usize, body: &str, n_features: usize) -> Result<RawNode> {
        let bad = || Self::err(n, format!("malformed split {body:?}"));
        let rest = body.strip_prefix("[f").ok_or_else(bad)?;
        let (cond, links) = rest.split_once("] ").ok_or_else(bad)?;
        let (feature, threshold) = cond.split_once('<').ok_or_else(bad)?;
        let feature: usize = Self::number(n, feature, "feature index")?;
        if feature >= n_features {
            return Err(Self::err(n, format!("feature index {feature} out of range")));
        }
        let threshold: f64 = Self::number(n, threshold, "threshold")?;
        let mut ids = [None; 3];
        for part in links.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let slot = match k {
                "yes" => 0,
                "no" => 1,
                "missing" => 2,
                _ => return Err(bad()),
            };
            ids[slot] = Some(Self::number::<usize>(n, v, "child id")?);
        }
        match ids {
            [Some(yes), Some(no), Some(missing)] if missing == yes || missing == no => Ok(RawNode::Split {
                feature,
                threshold,
                yes,
                no,
                missing,
            }),
            _ => Err(bad()),
        }
    }
}

fn assemble(nodes: &[(usize, RawNode)], id: usize, used: &mut [bool]) -> Result<TreeNode> {
    let (line, node) = nodes.get(id).ok_or_else(|| Error::ModelFormat {
        line: 0,
        message: format!("reference to missing node {id}"),
    })?;
    if used[id] {
        return Err(Parser::err(*line, format!("node {id} referenced twice")));
    }
    used[id] = true;
    Ok(match *node {
        RawNode::Leaf(w) => TreeNode::leaf(w),
        RawNode::Split {
            feature,
            threshold,
            yes,
            no,
            missing,
        } => {
            if yes <= id || no <= id {
                return Err(Parser::err(*line, "child ids must follow their parent"));
            }
            TreeNode::split(
                feature,
                threshold,
                missing == yes,
                assemble(nodes, yes, used)?,
                assemble(nodes, no, used)?,
            )
        }
    })
}
