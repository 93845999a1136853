//! The `metaforge` command line. Exit codes: 0 clean, 1 findings, 2 usage,
//! I/O or environment trouble. Payload goes to stdout, diagnostics to stderr.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use metaforge_core::template::TermSourceSpec;
use metaforge_core::{
    generate_report, language_chain, new_instance, parse_instance, parse_template, render_plan, render_report_text,
    validate_instance, validate_template, InstanceError, RenderMode, Severity, Template, TemplateError, TemplateIssue,
    ValidationIssue,
};
use metaforge_gateway::{Gateway, GatewayConfig, GatewayError, ReqwestTransport};
use metaforge_service::{ServiceConfig, ServiceError};
use serde_json::Value;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_TROUBLE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "metaforge", version, about = "Metadata templates, instances, reports and authority lookups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a template document.
    ValidateTemplate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check an instance against its template.
    ValidateInstance {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// Required-field and lower-bound findings become errors.
        #[arg(long)]
        strict: bool,
        /// Warnings also fail the run.
        #[arg(long)]
        strict_warnings: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the render plan as JSON.
    RenderPlan {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value = "entry")]
        mode: String,
        #[arg(long, default_value = "en")]
        language: String,
    },
    /// Print a quality report.
    QualityReport {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Search an authority (or, with --ontology, a term source); prints `label<TAB>id`.
    Search {
        #[arg(long, required_unless_present = "ontology", conflicts_with = "ontology")]
        source: Option<String>,
        /// Ontology acronym to search instead of an authority.
        #[arg(long)]
        ontology: Option<String>,
        #[arg(long)]
        query: String,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        fail_empty: bool,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Resolve one identifier; prints `label<TAB>id`.
    Resolve {
        #[arg(long)]
        source: String,
        #[arg(long)]
        id: String,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "METAFORGE_DATA_DIR", default_value = "metaforge-data")]
        data_dir: PathBuf,
        /// Require this bearer token on every route but /v1/healthz.
        #[arg(long, env = "METAFORGE_TOKEN", hide_env_values = true)]
        token: Option<String>,
        /// Allowed CORS origin; repeatable. Any origin when absent.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
        #[command(flatten)]
        gateway: GatewayArgs,
    },
}

#[derive(Debug, clap::Args)]
pub struct GatewayArgs {
    /// Serve recorded fixtures instead of calling upstream registries.
    #[arg(long, env = "GATEWAY_OFFLINE", value_parser = clap::builder::BoolishValueParser::new())]
    pub offline: bool,
    /// Directory of recorded upstream payloads and the vocabulary index.
    #[arg(long, env = "METAFORGE_FIXTURES", default_value = "fixtures/gateway")]
    pub fixtures: PathBuf,
}

impl GatewayArgs {
    fn config(&self) -> GatewayConfig {
        GatewayConfig {
            offline: self.offline,
            fixture_dir: self.fixtures.clone(),
            ..GatewayConfig::from_env()
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Template { path: PathBuf, source: TemplateError },
    #[error("{0}")]
    Instance(#[from] InstanceError),
    #[error("{0}")]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("cannot write output: {0}")]
    Output(std::io::Error),
}

impl CliError {
    /// Machine-readable code for stderr.
    pub fn code(&self) -> &str {
        match self {
            Self::Read { .. } => "IO_ERROR",
            Self::Template { source, .. } => source.code(),
            Self::Instance(e) => e.code(),
            Self::Gateway(e) => e.code(),
            Self::Service(_) | Self::Bind { .. } | Self::Output(_) => "ENVIRONMENT",
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Output(e)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Template {
        path: path.to_owned(),
        source: TemplateError::MalformedJson(e.to_string()),
    })
}

fn load_template(path: &Path) -> Result<Template, CliError> {
    parse_template(&read_json(path)?).map_err(|source| CliError::Template {
        path: path.to_owned(),
        source,
    })
}

fn load_instance_doc(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Instance(InstanceError::MalformedJson(e.to_string())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

/// `severity<TAB>path<TAB>code<TAB>message`; the template root prints as `-`.
pub fn template_issue_line(i: &TemplateIssue) -> String {
    let path = if i.path.is_empty() { "-" } else { &i.path };
    format!("{}\t{}\t{}\t{}", i.severity, path, i.code, i.message)
}

pub fn issue_line(i: &ValidationIssue) -> String {
    let path = i.path.to_string();
    let path = if path.is_empty() { "-".to_owned() } else { path };
    format!("{}\t{}\t{}\t{}", i.severity, path, i.code.as_str(), i.message)
}

/// Runs one command, writing payload to `out`. Returns the exit code.
pub async fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match cli.command {
        Command::ValidateTemplate { file, format } => {
            let doc = read_json(&file)?;
            let issues = match parse_template(&doc) {
                Ok(t) => validate_template(&t),
                Err(TemplateError::MalformedJson(m)) => {
                    return Err(CliError::Template {
                        path: file,
                        source: TemplateError::MalformedJson(m),
                    })
                }
                Err(e) => vec![e.to_issue()],
            };
            match format {
                Format::Text => {
                    for i in &issues {
                        writeln!(out, "{}", template_issue_line(i))?;
                    }
                }
                Format::Json => writeln!(out, "{}", pretty(&serde_json::to_value(&issues).expect("issues serialize")))?,
            }
            Ok(if issues.iter().any(|i| i.severity == Severity::Error) { EXIT_FINDINGS } else { EXIT_OK })
        }
        Command::ValidateInstance {
            template,
            instance,
            strict,
            strict_warnings,
            format,
        } => {
            let t = load_template(&template)?;
            let parsed = parse_instance(&t, &load_instance_doc(&instance)?)?;
            let mut issues = parsed.issues;
            issues.extend(validate_instance(&t, &parsed.instance, strict)?);
            metaforge_core::instance::sort_issues(&mut issues);
            match format {
                Format::Text => {
                    for i in &issues {
                        writeln!(out, "{}", issue_line(i))?;
                    }
                }
                Format::Json => writeln!(out, "{}", pretty(&serde_json::json!({ "issues": issues })))?,
            }
            let failing = issues.iter().any(|i| i.is_error() || (strict_warnings && i.severity == Severity::Warning));
            Ok(if failing { EXIT_FINDINGS } else { EXIT_OK })
        }
        Command::RenderPlan {
            template,
            instance,
            mode,
            language,
        } => {
            let mode: RenderMode = mode.parse()?;
            let t = load_template(&template)?;
            let (inst, parse_issues) = match instance {
                Some(p) => {
                    let parsed = parse_instance(&t, &load_instance_doc(&p)?)?;
                    (parsed.instance, parsed.issues)
                }
                None => (new_instance(&t), Vec::new()),
            };
            let mut plan = render_plan(&t, &inst, mode, &language_chain(&language))?;
            plan.issues.extend(parse_issues);
            metaforge_core::instance::sort_issues(&mut plan.issues);
            writeln!(out, "{}", pretty(&plan.to_json()))?;
            Ok(EXIT_OK)
        }
        Command::QualityReport { template, instance, format } => {
            let t = load_template(&template)?;
            let parsed = parse_instance(&t, &load_instance_doc(&instance)?)?;
            let mut report = generate_report(&t, &parsed.instance)?;
            report.instance_ref = Some(instance.display().to_string());
            match format {
                Format::Text => write!(out, "{}", render_report_text(&report))?,
                Format::Json => {
                    let mut v = serde_json::to_value(&report).expect("reports serialize");
                    // the clock would make otherwise identical runs differ
                    v.as_object_mut().expect("report is an object").remove("generatedAt");
                    writeln!(out, "{}", pretty(&v))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Search {
            source,
            ontology,
            query,
            limit,
            fail_empty,
            gateway,
        } => {
            let gw = Gateway::new(&gateway.config(), Arc::new(ReqwestTransport::new()))?;
            let mut lines = String::new();
            match (source, ontology) {
                (_, Some(acronym)) => {
                    let src = [TermSourceSpec::Ontology { acronym }];
                    for t in gw.search_ontology(&src, &query, limit)? {
                        let _ = writeln!(lines, "{}\t{}", t.label, t.iri);
                    }
                }
                (Some(source), None) => {
                    for s in gw.search_authority(&source, &query, limit).await? {
                        let _ = writeln!(lines, "{}\t{}", s.label, s.id);
                    }
                }
                (None, None) => unreachable!("clap requires one of --source and --ontology"),
            }
            out.write_all(lines.as_bytes())?;
            Ok(if fail_empty && lines.is_empty() { EXIT_FINDINGS } else { EXIT_OK })
        }
        Command::Resolve { source, id, gateway } => {
            let gw = Gateway::new(&gateway.config(), Arc::new(ReqwestTransport::new()))?;
            match gw.resolve_identifier(&source, &id).await {
                Ok(s) => {
                    writeln!(out, "{}\t{}", s.label, s.id)?;
                    Ok(EXIT_OK)
                }
                Err(e @ (GatewayError::InvalidIdentifier(_) | GatewayError::NotFound(_))) => {
                    eprintln!("{}: {e}", e.code());
                    Ok(EXIT_FINDINGS)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Serve {
            port,
            host,
            data_dir,
            token,
            cors_origins,
            gateway,
        } => {
            let addr = format!("{host}:{port}");
            let listener = tokio::net::TcpListener::bind(&addr)
                .await
                .map_err(|source| CliError::Bind { addr: addr.clone(), source })?;
            let bound = listener.local_addr().map_err(|source| CliError::Bind { addr, source })?;
            writeln!(out, "listening on http://{bound}")?;
            out.flush()?;
            let config = ServiceConfig {
                bearer_token: token,
                cors_origins,
                ..ServiceConfig::new(data_dir, gateway.config())
            };
            let shutdown = async {
                let _ = tokio::signal::ctrl_c().await;
            };
            metaforge_service::serve(listener, &config, Arc::new(ReqwestTransport::new()), shutdown).await?;
            Ok(EXIT_OK)
        }
    }
}
