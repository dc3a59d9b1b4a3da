use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Expression, GameContext, MAX_GUESSES};

/// Position of a rule in its catalog.
pub type MessageId = u8;

/// Total number of rules a valid catalog holds.
pub const RULE_COUNT: usize = 39;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionRule {
    pub id: MessageId,
    pub context: GameContext,
    pub expression: Expression,
    pub message: String,
    /// Win rules only: the guess count this message congratulates.
    pub win_guess_count: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("catalog invalid: {0}")]
    CatalogInvalid(String),
}

/// The validated rule table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    rules: Vec<ReactionRule>,
}

impl Catalog {
    /// Parses tab-separated `context<TAB>expression<TAB>message` lines.
    /// Blank lines and lines starting with `#` are skipped. Win rules use the
    /// context token `win@N` with `N` in 1..=6.
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut rules = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |reason: String| CatalogError::Syntax { line: line_no, reason };
            let mut fields = line.splitn(3, '\t');
            let (ctx, expr, msg) = match (fields.next(), fields.next(), fields.next()) {
                (Some(c), Some(e), Some(m)) => (c.trim(), e.trim(), m.trim()),
                _ => return Err(syntax("expected 3 tab-separated fields".to_string())),
            };
            let (context, win_guess_count) = match ctx.split_once('@') {
                Some(("win", n)) => {
                    let n: u8 = n.parse().map_err(|_| syntax(alloc::format!("bad win guess count {n:?}")))?;
                    (GameContext::Win, Some(n))
                }
                Some(_) => return Err(syntax(alloc::format!("unexpected '@' in context {ctx:?}"))),
                None => (ctx.parse::<GameContext>().map_err(syntax)?, None),
            };
            let expression = expr.parse::<Expression>().map_err(syntax)?;
            if msg.is_empty() {
                return Err(syntax("empty message".to_string()));
            }
            if rules.len() >= u8::MAX as usize {
                return Err(CatalogError::CatalogInvalid("too many rules".to_string()));
            }
            rules.push(ReactionRule {
                id: rules.len() as MessageId,
                context,
                expression,
                message: msg.to_string(),
                win_guess_count,
            });
        }
        Self::from_rules(rules)
    }

    /// Validates a rule list. Ids are reassigned to list positions.
    pub fn from_rules(mut rules: Vec<ReactionRule>) -> Result<Self, CatalogError> {
        let invalid = |s: String| Err(CatalogError::CatalogInvalid(s));
        for (i, r) in rules.iter_mut().enumerate() {
            r.id = i as MessageId;
        }
        if rules.len() != RULE_COUNT {
            return invalid(alloc::format!("expected {RULE_COUNT} rules, found {}", rules.len()));
        }
        for ctx in GameContext::ALL {
            let n = rules.iter().filter(|r| r.context == ctx).count();
            if n != ctx.message_count() {
                return invalid(alloc::format!("context {ctx} needs {} messages, found {n}", ctx.message_count()));
            }
        }
        for r in &rules {
            match (r.context, r.win_guess_count) {
                (GameContext::Win, None) => return invalid(alloc::format!("win rule {:?} lacks a guess count", r.message)),
                (GameContext::Win, Some(n)) if !(1..=MAX_GUESSES).contains(&n) => {
                    return invalid(alloc::format!("win guess count {n} outside 1..=6"))
                }
                (ctx, Some(_)) if ctx != GameContext::Win => {
                    return invalid(alloc::format!("guess count on non-win rule {:?}", r.message))
                }
                _ => {}
            }
        }
        let win_counts: BTreeSet<u8> = rules.iter().filter_map(|r| r.win_guess_count).collect();
        if win_counts.len() != MAX_GUESSES as usize {
            return invalid("win rules must cover each guess count 1..=6 exactly once".to_string());
        }
        let texts: BTreeSet<&str> = rules.iter().map(|r| r.message.as_str()).collect();
        if texts.len() != rules.len() {
            return invalid("duplicate message text".to_string());
        }
        Ok(Catalog { rules })
    }

    pub fn rules(&self) -> &[ReactionRule] {
        &self.rules
    }

    pub fn rule(&self, id: MessageId) -> &ReactionRule {
        &self.rules[id as usize]
    }

    /// Rule ids for `ctx` in catalog order.
    pub fn ids_for(&self, ctx: GameContext) -> impl Iterator<Item = MessageId> + '_ {
        self.rules.iter().filter(move |r| r.context == ctx).map(|r| r.id)
    }

    pub fn win_rule(&self, guesses_used: u8) -> Option<&ReactionRule> {
        self.rules.iter().find(|r| r.win_guess_count == Some(guesses_used))
    }

    pub fn contexts(&self) -> BTreeSet<GameContext> {
        self.rules.iter().map(|r| r.context).collect()
    }

    pub fn expressions(&self) -> BTreeSet<Expression> {
        self.rules.iter().map(|r| r.expression).collect()
    }

    /// Serializes back to the tab-separated file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            match r.win_guess_count {
                Some(n) => out.push_str(&alloc::format!("win@{n}")),
                None => out.push_str(r.context.token()),
            }
            out.push('\t');
            out.push_str(r.expression.token());
            out.push('\t');
            out.push_str(&r.message);
            out.push('\n');
        }
        out
    }
}
