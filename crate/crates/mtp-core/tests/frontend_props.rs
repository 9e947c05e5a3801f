//! Frontend invariants over the fixture corpus and generated inputs.

mod common;

use common::fixture_path;
use mtp_core::frontend::token::{Keyword, TokenKind};
use mtp_core::frontend::{parse_module, parse_program, pretty_module, tokenize};
use mtp_core::mtir::collect_by_callsites;
use proptest::prelude::*;

const FIXTURES: [&str; 7] = [
    "calc_age.mtp",
    "person_init.mtp",
    "person_method.mtp",
    "unused_by.mtp",
    "game/game.mtp",
    "game/level.mtp",
    "game/primitives.mtp",
];

#[test]
fn every_fixture_round_trips_through_pretty_printer() {
    for rel in FIXTURES {
        let source = std::fs::read_to_string(fixture_path(rel)).unwrap();
        let ast = parse_module(tokenize(&source).unwrap(), "m").unwrap();
        let printed = pretty_module(&ast);
        let reparsed = parse_module(tokenize(&printed).unwrap(), "m")
            .unwrap_or_else(|e| panic!("{rel}: pretty output failed to parse: {e}\n{printed}"));
        assert_eq!(ast, reparsed, "{rel}: round trip changed the AST");
    }
}

#[test]
fn token_positions_are_monotonic_in_stream_order() {
    for rel in FIXTURES {
        let source = std::fs::read_to_string(fixture_path(rel)).unwrap();
        let tokens = tokenize(&source).unwrap();
        let mut prev = (0u32, 0u32);
        for token in &tokens {
            let pos = (token.line, token.column);
            assert!(pos > prev, "{rel}: token positions must strictly increase, {prev:?} then {pos:?}");
            prev = pos;
        }
    }
}

#[test]
fn by_keyword_tokens_equal_by_clause_nodes() {
    for rel in ["calc_age.mtp", "person_init.mtp", "person_method.mtp", "game/game.mtp", "unused_by.mtp"] {
        let modules = parse_program(&fixture_path(rel)).unwrap();
        let mut keyword_count = 0;
        for module in &modules {
            let raw = std::fs::read_to_string(fixture_path(rel).parent().unwrap().join(format!("{}.mtp", module.name)))
                .unwrap();
            keyword_count += tokenize(&raw)
                .unwrap()
                .iter()
                .filter(|t| matches!(t.kind, TokenKind::Keyword(Keyword::By)))
                .count();
        }
        let sites = collect_by_callsites(&modules);
        assert_eq!(sites.len(), keyword_count, "{rel}: one call-site per `by` keyword");
    }
}

proptest! {
    /// Lexing never panics and, when it succeeds, positions stay monotonic
    /// and in bounds.
    #[test]
    fn lexer_total_and_positions_in_bounds(source in "\\PC*") {
        if let Ok(tokens) = tokenize(&source) {
            let line_count = source.lines().count().max(1) as u32;
            let mut prev = (0u32, 0u32);
            for token in &tokens {
                prop_assert!(token.line >= 1 && token.column >= 1);
                prop_assert!(token.line <= line_count + 1);
                let pos = (token.line, token.column);
                prop_assert!(pos > prev);
                prev = pos;
            }
        }
    }

    /// Any string literal the renderer can produce lexes back to itself.
    #[test]
    fn string_literals_round_trip(s in "\\PC*") {
        let quoted = mtp_core::frontend::quote_str(&s);
        if let Ok(tokens) = tokenize(&quoted) {
            prop_assert_eq!(tokens.len(), 2);
            match &tokens[0].kind {
                TokenKind::StrLit(back) => prop_assert_eq!(back, &s),
                other => prop_assert!(false, "expected string literal, got {:?}", other),
            }
        } else {
            // Only raw newlines inside the literal are unlexable, and the
            // renderer escapes those.
            prop_assert!(false, "quoted strings always lex: {:?}", quoted);
        }
    }
}
