"""Opinion mining over street-interview transcripts with a chat-model annotator."""

__version__ = "0.1.0"
