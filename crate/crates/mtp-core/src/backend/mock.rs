//! Deterministic scripted backend for tests and offline runs.

use std::collections::VecDeque;
use std::sync::Mutex;

use super::{estimate_tokens, BackendError, CompletionRequest, CompletionResult, ModelBackend};

/// Serves canned responses either from an ordered script (each response
/// consumed once) or from substring-matcher rules (first match wins, rules
/// are reusable). Every request is recorded for assertions.
pub struct MockBackend {
    inner: Mutex<Inner>,
}

struct Inner {
    script: VecDeque<String>,
    rules: Vec<(String, String)>,
    requests: Vec<CompletionRequest>,
}

pub fn mock_backend(script: Vec<String>) -> MockBackend {
    MockBackend { inner: Mutex::new(Inner { script: script.into(), rules: Vec::new(), requests: Vec::new() }) }
}

/// `rules` are `(substring of the user text, response)` pairs.
pub fn mock_backend_with_rules(rules: Vec<(String, String)>) -> MockBackend {
    MockBackend { inner: Mutex::new(Inner { script: VecDeque::new(), rules, requests: Vec::new() }) }
}

impl MockBackend {
    pub fn from_script<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        mock_backend(responses.into_iter().map(Into::into).collect())
    }

    /// Every request seen so far, in order.
    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.inner.lock().unwrap().requests.clone()
    }

    pub fn calls(&self) -> usize {
        self.inner.lock().unwrap().requests.len()
    }
}

impl ModelBackend for MockBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        let mut inner = self.inner.lock().unwrap();
        inner.requests.push(request.clone());
        let text = if let Some(next) = inner.script.pop_front() {
            next
        } else if let Some((_, response)) =
            inner.rules.iter().find(|(needle, _)| request.prompt.user.contains(needle))
        {
            response.clone()
        } else {
            return Err(BackendError::ScriptExhausted { calls: inner.requests.len() });
        };
        Ok(CompletionResult {
            prompt_tokens: estimate_tokens(&request.prompt.system) + estimate_tokens(&request.prompt.user),
            completion_tokens: estimate_tokens(&text),
            text,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::{Prompt, Sections};

    fn request(user: &str) -> CompletionRequest {
        CompletionRequest {
            prompt: Prompt {
                system: "sys".into(),
                user: user.into(),
                sections: Sections::default(),
            },
            model_name: "mock".into(),
            hyperparams: Default::default(),
        }
    }

    #[test]
    fn script_served_in_order_then_exhausted() {
        let mock = MockBackend::from_script(["145", "146"]);
        assert_eq!(mock.complete(&request("a")).unwrap().text, "145");
        assert_eq!(mock.complete(&request("b")).unwrap().text, "146");
        assert!(matches!(
            mock.complete(&request("c")),
            Err(BackendError::ScriptExhausted { calls: 3 })
        ));
        assert_eq!(mock.calls(), 3);
    }

    #[test]
    fn single_scripted_response_records_request() {
        let mock = MockBackend::from_script(["145"]);
        let result = mock.complete(&request("what is the age")).unwrap();
        assert_eq!(result.text, "145");
        assert_eq!(result.completion_tokens, 1);
        let recorded = mock.requests();
        assert_eq!(recorded.len(), 1);
        assert_eq!(recorded[0].prompt.user, "what is the age");
    }

    #[test]
    fn rules_route_by_prompt_content() {
        let mock = mock_backend_with_rules(vec![
            ("Level".to_string(), "Level(...)".to_string()),
            ("Person".to_string(), "Person(...)".to_string()),
        ]);
        assert_eq!(mock.complete(&request("make a Level now")).unwrap().text, "Level(...)");
        assert_eq!(mock.complete(&request("a Person please")).unwrap().text, "Person(...)");
        assert_eq!(mock.complete(&request("Level again")).unwrap().text, "Level(...)");
        assert!(matches!(mock.complete(&request("nothing")), Err(BackendError::ScriptExhausted { .. })));
    }

    #[test]
    fn token_counts_use_whitespace_estimator() {
        let mock = MockBackend::from_script(["two words"]);
        let result = mock.complete(&request("three word prompt")).unwrap();
        // "sys" + "three word prompt"
        assert_eq!(result.prompt_tokens, 4);
        assert_eq!(result.completion_tokens, 2);
    }
}
