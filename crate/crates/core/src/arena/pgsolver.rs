//! The pgsolver interchange format.
//!
//! ```text
//! parity <max-id>;
//! <id> <priority> <owner> <succ>(,<succ>)* ("name")?;
//! ```
//!
//! The header is optional and, when present, bounds the ids from above.
//! Ids may be sparse; they are mapped to dense indices in ascending id
//! order. Tokens may be separated by arbitrary whitespace and the final
//! statement may omit its `;`. A `start <id>;` line is accepted and ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Game, GameError, Player, PositionSpec, Priority};

struct Statement {
    line: usize,
    text: String,
}

fn statements(text: &str) -> Result<Vec<Statement>, GameError> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 1;
    let mut line = 1;
    let mut in_quote = false;

    for c in text.chars() {
        if c == '\n' {
            if in_quote {
                return Err(GameError::SyntaxError {
                    line,
                    message: "unterminated name".into(),
                });
            }
            line += 1;
        }
        if c == '"' {
            in_quote = !in_quote;
        }
        if c == ';' && !in_quote {
            out.push(Statement {
                line: start_line,
                text: std::mem::take(&mut current),
            });
            continue;
        }
        if current.trim().is_empty() && !c.is_whitespace() {
            start_line = line;
        }
        current.push(c);
    }
    if in_quote {
        return Err(GameError::SyntaxError {
            line,
            message: "unterminated name".into(),
        });
    }
    if !current.trim().is_empty() {
        out.push(Statement {
            line: start_line,
            text: current,
        });
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, GameError> {
    token.parse().map_err(|_| GameError::SyntaxError {
        line,
        message: format!("expected {what}, found {token:?}"),
    })
}

struct Node {
    priority: Priority,
    owner: Player,
    successors: Vec<u64>,
    name: Option<String>,
}

/// Parses a game in pgsolver format.
pub fn parse_pgsolver(text: &str) -> Result<Game, GameError> {
    let mut max_id = None;
    let mut nodes: BTreeMap<u64, Node> = BTreeMap::new();

    for stmt in statements(text)? {
        let line = stmt.line;
        let body = stmt.text.trim();
        if body.is_empty() {
            continue;
        }
        let (head, name) = match body.find('"') {
            Some(open) => {
                let rest = &body[open + 1..];
                let close = rest.find('"').ok_or(GameError::SyntaxError {
                    line,
                    message: "unterminated name".into(),
                })?;
                if !rest[close + 1..].trim().is_empty() {
                    return Err(GameError::SyntaxError {
                        line,
                        message: "unexpected text after name".into(),
                    });
                }
                (&body[..open], Some(rest[..close].to_string()))
            }
            None => (body, None),
        };
        let tokens: Vec<&str> = head.split_whitespace().collect();
        match tokens.first().copied() {
            Some("parity") if name.is_none() => {
                if tokens.len() != 2 || max_id.is_some() || !nodes.is_empty() {
                    return Err(GameError::SyntaxError {
                        line,
                        message: "malformed header".into(),
                    });
                }
                max_id = Some(parse_num::<u64>(tokens[1], line, "maximum id")?);
                continue;
            }
            Some("start") if name.is_none() && tokens.len() == 2 => {
                parse_num::<u64>(tokens[1], line, "start id")?;
                continue;
            }
            _ => {}
        }
        if tokens.len() < 4 {
            return Err(GameError::SyntaxError {
                line,
                message: "expected `<id> <priority> <owner> <successors>`".into(),
            });
        }
        let id: u64 = parse_num(tokens[0], line, "position id")?;
        let priority = Priority(parse_num(tokens[1], line, "priority")?);
        let owner = parse_num::<u8>(tokens[2], line, "owner")
            .ok()
            .and_then(Player::from_index)
            .ok_or_else(|| GameError::SyntaxError {
                line,
                message: format!("owner must be 0 or 1, found {:?}", tokens[2]),
            })?;
        let joined = tokens[3..].concat();
        let mut successors = Vec::new();
        for s in joined.split(',') {
            if s.is_empty() {
                return Err(GameError::SyntaxError {
                    line,
                    message: "empty successor".into(),
                });
            }
            successors.push(parse_num::<u64>(s, line, "successor id")?);
        }
        if successors.is_empty() {
            return Err(GameError::EmptySuccessors(id as usize));
        }
        if let Some(max) = max_id {
            if id > max {
                return Err(GameError::HeaderBound { id, max });
            }
        }
        let node = Node {
            priority,
            owner,
            successors,
            name,
        };
        if nodes.insert(id, node).is_some() {
            return Err(GameError::DuplicateId(id));
        }
    }

    let index: BTreeMap<u64, usize> = nodes.keys().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut spec = Vec::with_capacity(nodes.len());
    for (id, node) in nodes {
        let successors = node
            .successors
            .iter()
            .map(|s| index.get(s).copied().ok_or(GameError::DanglingSuccessor(id)))
            .collect::<Result<Vec<_>, _>>()?;
        spec.push(PositionSpec {
            priority: node.priority,
            owner: node.owner,
            successors,
            name: node.name,
        });
    }
    Game::build(spec)
}

/// Writes the canonical form: header `parity <n-1>;` and one line per
/// position in index order, without a trailing newline.
pub fn write_pgsolver(game: &Game) -> String {
    let mut out = String::new();
    write!(out, "parity {};", game.len().saturating_sub(1)).unwrap();
    for v in game.positions() {
        out.push('\n');
        write!(out, "{} {} {} ", v, game.priority(v), game.owner(v)).unwrap();
        for (i, u) in game.successors(v).iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{u}").unwrap();
        }
        if let Some(name) = game.name(v) {
            write!(out, " \"{name}\"").unwrap();
        }
        out.push(';');
    }
    out
}
