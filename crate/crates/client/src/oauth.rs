use serde::{Deserialize, Serialize};
use url::Url;

use crate::entities::RegisteredApp;
use crate::error::{ClientError, Result};

/// The only scope ever requested.
pub const SCOPE: &str = "read";

pub const CLIENT_NAME: &str = "braids";

#[derive(Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstanceCredentials {
    pub instance_base_url: Url,
    pub client_id: String,
    pub client_secret: String,
    #[serde(default)]
    pub access_token: Option<String>,
}

impl std::fmt::Debug for InstanceCredentials {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InstanceCredentials")
            .field("instance_base_url", &self.instance_base_url.as_str())
            .field("client_id", &self.client_id)
            .field(
                "access_token",
                &self.access_token.as_ref().map(|_| "<redacted>"),
            )
            .finish_non_exhaustive()
    }
}

impl InstanceCredentials {
    pub fn scope(&self) -> &'static str {
        SCOPE
    }

    pub fn instance_host(&self) -> String {
        self.instance_base_url
            .host_str()
            .unwrap_or_default()
            .to_owned()
    }

    pub(crate) fn endpoint(&self, path: &str) -> Result<Url> {
        self.instance_base_url
            .join(path)
            .map_err(|e| ClientError::InvalidArgument(format!("bad instance url: {e}")))
    }
}

/// Normalizes user input such as `example.social` into a base URL.
pub fn parse_instance_url(raw: &str) -> Result<Url> {
    let raw = raw.trim().trim_end_matches('/');
    if raw.is_empty() {
        return Err(ClientError::InvalidArgument("instance is empty".into()));
    }
    let with_scheme = if raw.contains("://") {
        raw.to_owned()
    } else {
        format!("https://{raw}")
    };
    let url = Url::parse(&with_scheme)
        .map_err(|e| ClientError::InvalidArgument(format!("bad instance `{raw}`: {e}")))?;
    if !matches!(url.scheme(), "http" | "https") || url.host_str().is_none() {
        return Err(ClientError::InvalidArgument(format!(
            "bad instance `{raw}`"
        )));
    }
    Ok(url)
}

/// Registers this application with an instance (`POST /api/v1/apps`).
pub async fn register_app(
    http: &reqwest::Client,
    instance_base_url: &Url,
    redirect_uri: &Url,
) -> Result<InstanceCredentials> {
    let url = instance_base_url
        .join("/api/v1/apps")
        .map_err(|e| ClientError::InvalidArgument(e.to_string()))?;
    let response = http
        .post(url.clone())
        .form(&[
            ("client_name", CLIENT_NAME),
            ("redirect_uris", redirect_uri.as_str()),
            ("scopes", SCOPE),
        ])
        .send()
        .await
        .map_err(|source| ClientError::Network {
            url: instance_base_url.to_string(),
            source,
        })?;
    let status = response.status();
    if !status.is_success() {
        return Err(ClientError::Upstream {
            endpoint: "apps",
            status: status.as_u16(),
            body: response.text().await.unwrap_or_default(),
        });
    }
    let app: RegisteredApp = response.json().await.map_err(|e| ClientError::Decode {
        endpoint: "apps",
        message: e.to_string(),
    })?;
    Ok(InstanceCredentials {
        instance_base_url: instance_base_url.clone(),
        client_id: app.client_id,
        client_secret: app.client_secret,
        access_token: None,
    })
}

/// The instance's `/oauth/authorize` URL for the authorization-code flow.
pub fn authorization_url(
    credentials: &InstanceCredentials,
    redirect_uri: &Url,
    state: Option<&str>,
) -> Result<Url> {
    let mut url = credentials.endpoint("/oauth/authorize")?;
    {
        let mut q = url.query_pairs_mut();
        q.append_pair("response_type", "code")
            .append_pair("client_id", &credentials.client_id)
            .append_pair("redirect_uri", redirect_uri.as_str())
            .append_pair("scope", SCOPE);
        if let Some(state) = state {
            q.append_pair("state", state);
        }
    }
    Ok(url)
}

/// Registers with the instance and returns the credentials together with
/// the URL the user must visit.
pub async fn begin_authorization(
    http: &reqwest::Client,
    instance_base_url: &Url,
    redirect_uri: &Url,
    state: Option<&str>,
) -> Result<(InstanceCredentials, Url)> {
    let credentials = register_app(http, instance_base_url, redirect_uri).await?;
    let url = authorization_url(&credentials, redirect_uri, state)?;
    Ok((credentials, url))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn creds() -> InstanceCredentials {
        InstanceCredentials {
            instance_base_url: Url::parse("https://example.social").unwrap(),
            client_id: "cid".into(),
            client_secret: "secret".into(),
            access_token: Some("tok".into()),
        }
    }

    #[test]
    fn authorize_url_requests_read_only() {
        let redirect = Url::parse("https://self/cb").unwrap();
        let url = authorization_url(&creds(), &redirect, Some("st")).unwrap();
        assert_eq!(url.host_str(), Some("example.social"));
        assert_eq!(url.path(), "/oauth/authorize");
        let pairs: Vec<(String, String)> = url.query_pairs().into_owned().collect();
        assert!(pairs.contains(&("response_type".into(), "code".into())));
        assert!(pairs.contains(&("scope".into(), "read".into())));
        assert!(pairs.contains(&("client_id".into(), "cid".into())));
        assert!(pairs.contains(&("redirect_uri".into(), "https://self/cb".into())));
        assert!(pairs.contains(&("state".into(), "st".into())));
    }

    #[test]
    fn instance_url_normalization() {
        assert_eq!(
            parse_instance_url("example.social").unwrap().as_str(),
            "https://example.social/"
        );
        assert_eq!(
            parse_instance_url("http://127.0.0.1:3000/")
                .unwrap()
                .as_str(),
            "http://127.0.0.1:3000/"
        );
        assert!(parse_instance_url("").is_err());
        assert!(parse_instance_url("ftp://x").is_err());
    }

    #[test]
    fn debug_hides_secrets() {
        let s = format!("{:?}", creds());
        assert!(!s.contains("\"secret\"") && !s.contains("\"tok\""));
        assert!(s.contains("<redacted>"));
    }
}
