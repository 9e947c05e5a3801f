//! Prompt synthesis from an MT-IR entry plus dynamically bound values.
//!
//! The user text is a deterministic function of the structured [`Sections`],
//! laid out under fixed labels: `[Action]`, `[Type_Explanations]`,
//! `[Inputs]`, `[Self]`, `[Instructions]`, `[Prior_Output]`, `[Error]`,
//! `[Output_Format]`. Empty sections are omitted. Tests assert against
//! `sections`, so the wording can evolve without string-scraping.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frontend::ast::{Literal, TypeExpr};
use crate::mtir::{CallSiteKind, MtirEntry, OutputTypes, TypeSchema};
use crate::outparse::{failure_line, ParseFailure};
use crate::value::{render_value, Value};

/// Fixed one-line role statement sent as the system message.
pub const SYSTEM_MESSAGE: &str = "You are a typed evaluator embedded in a programming language runtime. Reply with exactly one value in the requested format and nothing else.";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PromptError {
    #[error("call-site `{site_id}` expects arguments ({expected}); got ({got})")]
    Arity { site_id: String, expected: String, got: String },

    #[error("call-site `{site_id}`: {message}")]
    Receiver { site_id: String, message: String },
}

/// Structured content of a synthesized prompt.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sections {
    pub action: String,
    pub type_explanations: Vec<String>,
    /// `(name, rendered value)` pairs, in parameter order.
    pub inputs: Vec<(String, String)>,
    /// Rendered receiver object for method calls.
    pub receiver: Option<String>,
    /// Developer-supplied `instructions="..."` hyperparameter, verbatim.
    pub instructions: Option<String>,
    pub prior_output: Option<String>,
    pub failure: Option<String>,
    pub output_instruction: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prompt {
    pub system: String,
    pub user: String,
    pub sections: Sections,
}

/// The shortened follow-up used by the retry loop.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionPrompt {
    pub prior_output: String,
    pub failure: String,
    pub expected_schema: String,
}

/// One `Type_Explanations` line: `Name(field: type, ...)`.
pub fn schema_line(schema: &TypeSchema) -> String {
    let fields: Vec<String> = schema.fields.iter().map(|(n, t)| format!("{n}: {t}")).collect();
    format!("{}({})", schema.name, fields.join(", "))
}

/// Splits an identifier into lowercase words: `get_next_level` and
/// `getNextLevel` both become `get next level`.
pub fn identifier_words(ident: &str) -> String {
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for c in ident.chars() {
        if c == '_' {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev_lower = false;
            continue;
        }
        if c.is_uppercase() && prev_lower && !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
        prev_lower = c.is_lowercase();
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    words.join(" ")
}

fn action_for(entry: &MtirEntry) -> String {
    match entry.kind {
        CallSiteKind::FunctionDef => identifier_words(&entry.subject),
        CallSiteKind::MethodDef => {
            let method = entry.subject.rsplit('.').next().unwrap_or(&entry.subject);
            identifier_words(method)
        }
        CallSiteKind::ObjectInit => format!("initialize {}", identifier_words(&entry.subject)),
    }
}

fn output_instruction_for(entry: &MtirEntry) -> String {
    match &entry.outputs {
        OutputTypes::Return(ty) => match ty {
            TypeExpr::Primitive(p) => {
                format!("Respond with a single bare {} literal and nothing else.", p.as_str())
            }
            TypeExpr::Named { name, .. } => format!(
                "Respond with a single complete {name}(field=value, ...) constructor expression and nothing else."
            ),
            other => format!(
                "Respond with a single value of type {other} in constructor-expression syntax and nothing else."
            ),
        },
        OutputTypes::Missing(_) => format!(
            "Respond with a single complete {subject}(field=value, ...) constructor expression covering every field of {subject} and nothing else.",
            subject = entry.subject
        ),
    }
}

/// Hyperparameters forwarded to the backend: everything from the `by`
/// clause except `instructions`, which is prompt content, not a sampling
/// parameter.
pub fn model_hyperparams(entry: &MtirEntry) -> BTreeMap<String, Literal> {
    entry.hyperparams.iter().filter(|(k, _)| k.as_str() != "instructions").map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn instructions_of(entry: &MtirEntry) -> Option<String> {
    match entry.hyperparams.get("instructions") {
        Some(Literal::Str(s)) => Some(s.clone()),
        _ => None,
    }
}

fn render_user(sections: &Sections) -> String {
    let mut parts: Vec<String> = Vec::new();
    parts.push(format!("[Action]\n{}", sections.action));
    if !sections.type_explanations.is_empty() {
        parts.push(format!("[Type_Explanations]\n{}", sections.type_explanations.join("\n")));
    }
    if !sections.inputs.is_empty() {
        let lines: Vec<String> = sections.inputs.iter().map(|(n, v)| format!("{n} = {v}")).collect();
        parts.push(format!("[Inputs]\n{}", lines.join("\n")));
    }
    if let Some(receiver) = &sections.receiver {
        parts.push(format!("[Self]\n{receiver}"));
    }
    if let Some(instructions) = &sections.instructions {
        parts.push(format!("[Instructions]\n{instructions}"));
    }
    if let Some(prior) = &sections.prior_output {
        parts.push(format!("[Prior_Output]\n{prior}"));
    }
    if let Some(failure) = &sections.failure {
        parts.push(format!("[Error]\n{failure}"));
    }
    parts.push(format!("[Output_Format]\n{}", sections.output_instruction));
    parts.join("\n\n")
}

fn finish(sections: Sections) -> Prompt {
    let user = render_user(&sections);
    Prompt { system: SYSTEM_MESSAGE.to_string(), user, sections }
}

/// Builds the first-attempt prompt for a call-site.
///
/// `bound_values` must name the entry's parameters in order; `receiver` is
/// required exactly for method sites. Hyperparameters never appear in the
/// text (they ride along to the backend call), with the single exception of
/// the `instructions` string.
pub fn synthesize_prompt(
    entry: &MtirEntry,
    bound_values: &[(String, Value)],
    receiver: Option<&Value>,
) -> Result<Prompt, PromptError> {
    let expected: Vec<&str> = entry.params.iter().map(|(n, _)| n.as_str()).collect();
    let got: Vec<&str> = bound_values.iter().map(|(n, _)| n.as_str()).collect();
    if expected != got {
        return Err(PromptError::Arity {
            site_id: entry.site_id.clone(),
            expected: expected.join(", "),
            got: got.join(", "),
        });
    }
    match (entry.kind, receiver.is_some()) {
        (CallSiteKind::MethodDef, false) => {
            return Err(PromptError::Receiver {
                site_id: entry.site_id.clone(),
                message: "method call-site requires a receiver".to_string(),
            });
        }
        (CallSiteKind::FunctionDef | CallSiteKind::ObjectInit, true) => {
            return Err(PromptError::Receiver {
                site_id: entry.site_id.clone(),
                message: "only method call-sites take a receiver".to_string(),
            });
        }
        _ => {}
    }
    let sections = Sections {
        action: action_for(entry),
        type_explanations: entry.type_explanations.iter().map(schema_line).collect(),
        inputs: bound_values.iter().map(|(n, v)| (n.clone(), render_value(v))).collect(),
        receiver: receiver.map(render_value),
        instructions: instructions_of(entry),
        prior_output: None,
        failure: None,
        output_instruction: output_instruction_for(entry),
    };
    Ok(finish(sections))
}

fn expected_schema_line(entry: &MtirEntry) -> String {
    let named_line = |name: &str| {
        entry.schema(name).map(schema_line).unwrap_or_else(|| name.to_string())
    };
    match &entry.outputs {
        OutputTypes::Return(TypeExpr::Named { name, .. }) => named_line(name),
        OutputTypes::Return(other) => other.to_string(),
        OutputTypes::Missing(_) => named_line(&entry.subject),
    }
}

/// Builds the revised prompt after a conversion failure: the prior output
/// verbatim, the first failure diagnostic, and the expected schema line.
/// Inputs and the full type closure are deliberately omitted to keep retries
/// cheap.
pub fn synthesize_correction_prompt(entry: &MtirEntry, prior_output: &str, failure: &ParseFailure) -> Prompt {
    let correction = CorrectionPrompt {
        prior_output: prior_output.to_string(),
        failure: failure_line(failure),
        expected_schema: expected_schema_line(entry),
    };
    let sections = Sections {
        action: "correct the previous output".to_string(),
        type_explanations: vec![correction.expected_schema],
        inputs: Vec::new(),
        receiver: None,
        instructions: None,
        prior_output: Some(correction.prior_output),
        failure: Some(correction.failure),
        output_instruction: output_instruction_for(entry),
    };
    finish(sections)
}
