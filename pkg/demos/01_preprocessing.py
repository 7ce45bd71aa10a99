"""Walk through tweet normalization step by step.

Shows how emoji become their names, how repeated @USER mentions collapse,
how URL placeholders are rewritten, and how hashtags are split into words.
"""

from offlang.textnorm import (
    RawTweet,
    bundled_emoji_table,
    bundled_unigram_table,
    normalize,
    segment_hashtag,
)

emoji = bundled_emoji_table()
unigrams = bundled_unigram_table()

tweets = [
    RawTweet(id="1", text="I \U0001F44D this so much ❤"),
    RawTweet(id="2", text="@USER @USER @USER you are all wrong URL"),
    RawTweet(id="3", text="what a day #KeithEllisonAbuse #maga"),
    RawTweet(id="4", text="plain text stays plain text"),
]

for tweet in tweets:
    result = normalize(tweet, emoji, unigrams)
    print(f"raw:        {tweet.text!r}")
    print(f"normalized: {result.text!r}")
    print(f"steps:      {', '.join(result.steps_applied) or '(none)'}")
    print()

# Hashtag segmentation on its own: camel case splits at the capitals,
# everything else runs through the unigram dynamic program.
for tag in ("KeithEllisonAbuse", "thisisatest", "maga"):
    print(f"#{tag} -> {segment_hashtag(tag, unigrams)!r}")
