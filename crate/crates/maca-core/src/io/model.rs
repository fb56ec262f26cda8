//! Versioned text serialization of trained trees.
//!
//! The format is line-oriented and diffable: a version line, a checksum of
//! everything after it, the metadata header, then the tree in depth-first
//! order. Rule vectors appear as comma-separated integers and routing keys
//! as bitstrings. Serialization is byte-deterministic for a given tree.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::ca::{CAState, RuleVector};
use crate::classifier::{ClassId, MacaTree, TreeNode};
use crate::error::{Error, Result};
use crate::ga::GaParams;

const MAGIC: &str = "maca-tree";
const VERSION: &str = "v1";

/// Serializes a tree to its canonical text form.
pub fn model_to_string(tree: &MacaTree) -> String {
    let mut body = String::new();
    body.push_str(&format!("n {}\n", tree.n));
    body.push_str(&format!("boundary {}\n", tree.boundary));
    body.push_str(&format!("classes {}\n", tree.classes.len()));
    for class in &tree.classes {
        body.push_str(&format!("class {class}\n"));
    }
    let p = &tree.build_params;
    body.push_str(&format!(
        "params pop {} elite {} mutation {} mutant-share {} generations {} target {} seed {}\n",
        p.population_size,
        p.elite_fraction,
        p.mutation_bit_rate,
        p.mutant_share,
        p.max_generations,
        p.target_fitness,
        p.rng_seed
    ));
    body.push_str(&format!("seed-candidates {}\n", p.seed_candidates.len()));
    for candidate in &p.seed_candidates {
        body.push_str(&format!("candidate {candidate}\n"));
    }
    body.push_str("root\n");
    write_node(&tree.root, &mut body);

    let checksum = digest(&body);
    format!("{MAGIC} {VERSION}\nchecksum {checksum}\n{body}")
}

fn write_node(node: &TreeNode, out: &mut String) {
    match node {
        TreeNode::Leaf(label) => out.push_str(&format!("leaf {label}\n")),
        TreeNode::Branch {
            rules,
            routes,
            default_label,
        } => {
            out.push_str(&format!(
                "branch default {default_label} rules {rules} routes {}\n",
                routes.len()
            ));
            for (key, child) in routes {
                out.push_str(&format!("route {key}\n"));
                write_node(child, out);
            }
        }
    }
}

fn digest(body: &str) -> String {
    let hash = Sha256::digest(body.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Parses the canonical text form back into a tree.
pub fn model_from_str(text: &str) -> Result<MacaTree> {
    let mut lines = text.lines().enumerate();
    let (_, magic_line) = lines.next().ok_or_else(|| integrity("empty model file"))?;
    let mut magic_parts = magic_line.split(' ');
    if magic_parts.next() != Some(MAGIC) {
        return Err(integrity("not a model file"));
    }
    let found_version = magic_parts.next().unwrap_or("").to_string();
    if found_version != VERSION {
        return Err(Error::ModelVersion {
            found: found_version,
            expected: VERSION.to_string(),
        });
    }
    let (_, checksum_line) = lines
        .next()
        .ok_or_else(|| integrity("missing checksum line"))?;
    let declared = checksum_line
        .strip_prefix("checksum ")
        .ok_or_else(|| integrity("missing checksum line"))?;
    let body_start = text
        .match_indices('\n')
        .nth(1)
        .map(|(i, _)| i + 1)
        .ok_or_else(|| integrity("truncated header"))?;
    let body = &text[body_start..];
    if digest(body) != declared {
        return Err(integrity("checksum mismatch (file corrupted or truncated)"));
    }

    let mut parser = Parser {
        lines: body.lines().enumerate().peekable(),
        offset: 3,
    };
    parser.parse_tree()
}

fn integrity(msg: &str) -> Error {
    Error::ModelIntegrity(msg.to_string())
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    /// Line-number offset of the body within the whole file.
    offset: usize,
}

impl Parser<'_> {
    fn next_line(&mut self) -> Result<(usize, &'_ str)> {
        self.lines
            .next()
            .map(|(i, l)| (i + self.offset, l))
            .ok_or_else(|| Error::Format {
                line: 0,
                msg: "unexpected end of model body".into(),
            })
    }

    fn expect_field<'l>(line: &'l str, line_no: usize, key: &str) -> Result<&'l str> {
        line.strip_prefix(key)
            .and_then(|rest| {
                rest.strip_prefix(' ')
                    .or(Some(rest).filter(|r| r.is_empty()))
            })
            .ok_or_else(|| Error::Format {
                line: line_no,
                msg: format!("expected {key:?} line, got {line:?}"),
            })
    }

    fn parse_tree(&mut self) -> Result<MacaTree> {
        let (ln, line) = self.next_line()?;
        let n: usize = parse_num(Self::expect_field(line, ln, "n")?, ln)?;

        let (ln, line) = self.next_line()?;
        let boundary = Self::expect_field(line, ln, "boundary")?
            .parse()
            .map_err(|_| Error::Format {
                line: ln,
                msg: "invalid boundary mode".into(),
            })?;

        let (ln, line) = self.next_line()?;
        let class_count: usize = parse_num(Self::expect_field(line, ln, "classes")?, ln)?;
        let mut classes = Vec::with_capacity(class_count);
        for _ in 0..class_count {
            let (ln, line) = self.next_line()?;
            classes.push(Self::expect_field(line, ln, "class")?.to_string());
        }

        let (ln, line) = self.next_line()?;
        let params_text = Self::expect_field(line, ln, "params")?;
        let mut build_params = parse_params(params_text, ln)?;

        let (ln, line) = self.next_line()?;
        let candidate_count: usize =
            parse_num(Self::expect_field(line, ln, "seed-candidates")?, ln)?;
        for _ in 0..candidate_count {
            let (ln, line) = self.next_line()?;
            let values = parse_rule_values(Self::expect_field(line, ln, "candidate")?, ln)?;
            build_params
                .seed_candidates
                .push(RuleVector::from_values(&values).map_err(|e| Error::Format {
                    line: ln,
                    msg: e.to_string(),
                })?);
        }

        let (ln, line) = self.next_line()?;
        Self::expect_field(line, ln, "root")?;
        let root = self.parse_node(n)?;
        if let Some((i, line)) = self.lines.next() {
            return Err(Error::Format {
                line: i + self.offset,
                msg: format!("trailing content {line:?} after tree"),
            });
        }

        Ok(MacaTree {
            root,
            n,
            classes,
            boundary,
            build_params,
        })
    }

    fn parse_node(&mut self, n: usize) -> Result<TreeNode> {
        let (ln, line) = self.next_line()?;
        if let Some(rest) = line.strip_prefix("leaf ") {
            return Ok(TreeNode::Leaf(ClassId(parse_num(rest, ln)?)));
        }
        let rest = line.strip_prefix("branch ").ok_or_else(|| Error::Format {
            line: ln,
            msg: format!("expected leaf or branch, got {line:?}"),
        })?;
        // branch default <label> rules <ints> routes <count>
        let tokens: Vec<&str> = rest.split(' ').collect();
        if tokens.len() != 6
            || tokens[0] != "default"
            || tokens[2] != "rules"
            || tokens[4] != "routes"
        {
            return Err(Error::Format {
                line: ln,
                msg: format!("malformed branch line {line:?}"),
            });
        }
        let default_label = ClassId(parse_num(tokens[1], ln)?);
        let values = parse_rule_values(tokens[3], ln)?;
        let rules = RuleVector::from_values(&values).map_err(|e| Error::Format {
            line: ln,
            msg: e.to_string(),
        })?;
        if rules.len() != n {
            return Err(Error::Format {
                line: ln,
                msg: format!("rule vector width {} does not match n {n}", rules.len()),
            });
        }
        let route_count: usize = parse_num(tokens[5], ln)?;
        let mut routes = std::collections::BTreeMap::new();
        for _ in 0..route_count {
            let (ln, line) = self.next_line()?;
            let key_text = Self::expect_field(line, ln, "route")?;
            let key = CAState::from_bitstring(key_text).map_err(|e| Error::Format {
                line: ln,
                msg: e.to_string(),
            })?;
            if key.len() != n {
                return Err(Error::Format {
                    line: ln,
                    msg: format!("route key width {} does not match n {n}", key.len()),
                });
            }
            let child = self.parse_node(n)?;
            routes.insert(key, child);
        }
        Ok(TreeNode::Branch {
            rules,
            routes,
            default_label,
        })
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Format {
        line,
        msg: format!("invalid number {s:?}"),
    })
}

fn parse_rule_values(s: &str, line: usize) -> Result<Vec<u8>> {
    s.split(',').map(|tok| parse_num(tok, line)).collect()
}

fn parse_params(text: &str, line: usize) -> Result<GaParams> {
    let tokens: Vec<&str> = text.split(' ').collect();
    let expected = [
        "pop",
        "elite",
        "mutation",
        "mutant-share",
        "generations",
        "target",
        "seed",
    ];
    if tokens.len() != 14 {
        return Err(Error::Format {
            line,
            msg: format!("malformed params line (got {} tokens)", tokens.len()),
        });
    }
    for (i, key) in expected.iter().enumerate() {
        if tokens[2 * i] != *key {
            return Err(Error::Format {
                line,
                msg: format!("expected params key {key:?}, got {:?}", tokens[2 * i]),
            });
        }
    }
    Ok(GaParams {
        population_size: parse_num(tokens[1], line)?,
        elite_fraction: parse_num(tokens[3], line)?,
        mutation_bit_rate: parse_num(tokens[5], line)?,
        mutant_share: parse_num(tokens[7], line)?,
        max_generations: parse_num(tokens[9], line)?,
        target_fitness: parse_num(tokens[11], line)?,
        rng_seed: parse_num(tokens[13], line)?,
        seed_candidates: Vec::new(),
    })
}

/// Writes the serialized tree atomically (temp file + rename).
pub fn save_model(tree: &MacaTree, path: &Path) -> Result<()> {
    write_atomic(path, model_to_string(tree).as_bytes())
}

/// Reads and verifies a model file.
pub fn load_model(path: &Path) -> Result<MacaTree> {
    let text = fs::read_to_string(path)?;
    model_from_str(&text)
}

/// Write-to-temp-then-rename so a failed write never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("not a file path: {path:?}")))?;
    let tmp = path.with_file_name(format!("{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
