# Configuration module for IQCaption360 desk toolkit
