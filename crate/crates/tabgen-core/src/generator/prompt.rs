//! Prompt templates and the JSON response schema attached to remote
//! structured-output requests.

use crate::table::{ColumnKind, Schema};

/// Template for generation with in-context examples. `{data}` receives the
/// serialized rows and `{count}` the requested sample count.
pub const GENERATION_TEMPLATE: &str = "\
You are a synthetic data generator tasked with creating new tabular data samples that closely mirror the distribution and characteristics of the original dataset.

# Instruction
1. Analyze the provided real samples carefully.
2. Generate synthetic data that maintains the statistical properties of the real data.
3. Ensure all attributes cover their full expected ranges, including less common or extreme values.
4. Maintain the relationships and correlations between different attributes.
5. Preserve the overall distribution of the real data while introducing realistic variations.

# Key points to consider
- Replicate the data types of each column (e.g., numerical, categorical).
- Match the range and distribution of numerical attributes.
- Maintain the frequency distribution of categorical attributes.
- Reflect any patterns or trends present in the original data.
- Introduce realistic variability to avoid exact duplication.

# Real samples
{data}

# Output format:
Please present the generated data in a JSON format, structured as a list of objects, where each object represents a single data point with all attributes.

Generate {count} samples of synthetic data.
";

/// Template for schema-only generation: column names, no example rows.
pub const SCHEMA_ONLY_TEMPLATE: &str = "\
You are a synthetic data generator tasked with creating new tabular data samples that closely mirror the distribution and characteristics of the original dataset.
Generate {count} samples of synthetic data.

Each sample should include the following attributes:
{attributes_list}

Make sure that the numbers make sense for each attribute.

Output Format:
Present the generated data in a JSON format, structured as a list of objects, where each object represents a single data point with all attributes.
";

#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub text: String,
    pub requested_count: usize,
    pub response_schema: serde_json::Value,
}

/// Instantiate the in-context template with serialized rows.
pub fn build_prompt(in_context_json: &str, count: usize, schema: &Schema) -> PromptBundle {
    let text = GENERATION_TEMPLATE
        .replace("{data}", in_context_json)
        .replace("{count}", &count.to_string());
    PromptBundle {
        text,
        requested_count: count,
        response_schema: response_schema(schema),
    }
}

/// Instantiate the attribute-list-only template (no data values).
pub fn build_dummy_prompt(schema: &Schema, count: usize) -> PromptBundle {
    let attributes = schema
        .columns
        .iter()
        .map(|c| format!("- {}", c.name))
        .collect::<Vec<_>>()
        .join("\n");
    let text = SCHEMA_ONLY_TEMPLATE
        .replace("{attributes_list}", &attributes)
        .replace("{count}", &count.to_string());
    PromptBundle {
        text,
        requested_count: count,
        response_schema: response_schema(schema),
    }
}

/// JSON schema for the structured-output constraint: an object holding a
/// `JSON` array of row objects, every column required, numbers for numeric
/// columns and strings for categorical ones.
pub fn response_schema(schema: &Schema) -> serde_json::Value {
    let mut properties = serde_json::Map::new();
    let mut required = Vec::new();
    for col in &schema.columns {
        let ty = match col.kind {
            ColumnKind::Numeric { .. } => "number",
            ColumnKind::Categorical { .. } => "string",
        };
        properties.insert(col.name.clone(), serde_json::json!({ "type": ty }));
        required.push(serde_json::Value::String(col.name.clone()));
    }
    serde_json::json!({
        "type": "object",
        "properties": {
            "JSON": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": properties,
                    "required": required,
                    "additionalProperties": false
                }
            }
        },
        "required": ["JSON"],
        "additionalProperties": false
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{ColumnSpec, Schema};

    fn schema() -> Schema {
        Schema::new(
            vec![
                ColumnSpec::categorical("name", ["Alice"]),
                ColumnSpec::numeric("age", 0.0, 100.0),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn prompt_substitutes_data_and_count() {
        let rows = r#"[{"name":"Alice","age":25}]"#;
        let bundle = build_prompt(rows, 50, &schema());
        assert!(bundle.text.contains(rows));
        assert!(bundle.text.contains("Generate 50 samples of synthetic data."));
        assert!(bundle.text.contains("# Real samples"));
        assert!(!bundle.text.contains("{data}"));
        assert_eq!(bundle.requested_count, 50);

        let one = build_prompt(rows, 1, &schema());
        assert!(one.text.contains("Generate 1 samples of synthetic data."));
    }

    #[test]
    fn prompt_is_byte_stable() {
        let rows = r#"[{"name":"Alice","age":25}]"#;
        assert_eq!(build_prompt(rows, 50, &schema()), build_prompt(rows, 50, &schema()));
    }

    #[test]
    fn rendered_prompt_matches_golden_text() {
        let golden = "\
You are a synthetic data generator tasked with creating new tabular data samples that closely mirror the distribution and characteristics of the original dataset.

# Instruction
1. Analyze the provided real samples carefully.
2. Generate synthetic data that maintains the statistical properties of the real data.
3. Ensure all attributes cover their full expected ranges, including less common or extreme values.
4. Maintain the relationships and correlations between different attributes.
5. Preserve the overall distribution of the real data while introducing realistic variations.

# Key points to consider
- Replicate the data types of each column (e.g., numerical, categorical).
- Match the range and distribution of numerical attributes.
- Maintain the frequency distribution of categorical attributes.
- Reflect any patterns or trends present in the original data.
- Introduce realistic variability to avoid exact duplication.

# Real samples
[{\"name\":\"Alice\",\"age\":25}]

# Output format:
Please present the generated data in a JSON format, structured as a list of objects, where each object represents a single data point with all attributes.

Generate 2 samples of synthetic data.
";
        let bundle = build_prompt(r#"[{"name":"Alice","age":25}]"#, 2, &schema());
        assert_eq!(bundle.text, golden);
    }

    #[test]
    fn rendered_dummy_prompt_matches_golden_text() {
        let golden = "\
You are a synthetic data generator tasked with creating new tabular data samples that closely mirror the distribution and characteristics of the original dataset.
Generate 50 samples of synthetic data.

Each sample should include the following attributes:
- name
- age

Make sure that the numbers make sense for each attribute.

Output Format:
Present the generated data in a JSON format, structured as a list of objects, where each object represents a single data point with all attributes.
";
        let bundle = build_dummy_prompt(&schema(), 50);
        assert_eq!(bundle.text, golden);
    }

    #[test]
    fn dummy_prompt_lists_attributes_only() {
        let wide = Schema::new(
            (0..10)
                .map(|i| ColumnSpec::numeric(format!("col{i}"), 0.0, 1.0))
                .collect(),
            None,
        )
        .unwrap();
        let bundle = build_dummy_prompt(&wide, 50);
        for i in 0..10 {
            assert!(bundle.text.contains(&format!("- col{i}")));
        }
        assert!(bundle.text.contains("Generate 50 samples of synthetic data."));
        assert!(!bundle.text.contains("# Real samples"));

        let single = Schema::new(vec![ColumnSpec::numeric("only", 0.0, 1.0)], None).unwrap();
        let bundle = build_dummy_prompt(&single, 5);
        assert_eq!(bundle.text.matches("- ").count(), 1);
    }

    #[test]
    fn response_schema_covers_every_column() {
        let value = response_schema(&schema());
        let items = &value["properties"]["JSON"]["items"];
        assert_eq!(items["properties"]["name"]["type"], "string");
        assert_eq!(items["properties"]["age"]["type"], "number");
        assert_eq!(items["required"].as_array().unwrap().len(), 2);
    }
}
