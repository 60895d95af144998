//! Survey wording for the two built-in studies.

pub const INSTRUCTION: &str =
    "Which option do you choose? You have to pick one option. Don’t explain your choice, just name the option you choose.";

pub const CLARIFICATION: &str = "Please reply with the option you choose only, for example \"Option 1\".";

pub mod policy_support {
    pub const PERSONA: &str = "You are a {age} years old {gender}, your highest level of school you have completed or the highest degree you have received is {education_level}, your major subject of study was {education_subject}, your total yearly household income before taxes is approximately {income} you describe your political orientation as {political_orientation}.";

    pub const BRIEFING: &str = "Carbon capture and storage (CCS) is a set of technologies aimed at capturing, transporting, and storing carbon dioxide (CO2) emitted from industrial facilities and power plants that use fossil fuels like coal and natural gas. CO2 emissions are one of the major contributors to climate change. The goal of CCS is to prevent CO2 from reaching the atmosphere by injecting it in suitable underground geological formations - depleted oil and gas fields and deep saline formations - for permanent storage.

Some scientific studies promote CCS as a prospective solution to climate change, as it could significantly contribute to the reduction of CO2 emissions, while other studies emphasize that CCS is a very costly technology and there is a need to investigate its potential risks in order to ensure that its deployment would not have an adverse impact on people and the environment. Political discussions currently focus on how to regulate and implement the use of CCS.

You may or may not agree with scaling up CCS, but if a scale-up were to be implemented in your state, you may still have different preferences as to specific scenarios. In the following, we will sketch out some scenarios for a scale-up of CCS. Please take a look at these scenarios and evaluate them.";

    pub const ATTRIBUTES: &str = "The below-mentioned policy scenarios each consist of 6 aspects:
1. Policy type: Which policies should be implemented to promote CCS? a) A ban on the construction of new fossil fuel power plants without CCS in your state: According to this policy, no new coal- or gas-fired power stations can be built in your state without including CCS. b) Government subsidies for CCS in your state: Your state government could subsidize CCS projects. This would make deployment of the technology more economically attractive. c) Increase in taxes on fossil fuel power generation without CCS in your state: Such a policy would make fossil fuel power generation with no CCS more expensive.
2. Policy cost: All policies to scale up CCS would produce some costs for American consumers. However, the exact amount depends on many factors, such as the concrete policy calibration, economic conditions, etc. Estimates for a scale-up policy currently range between costs of US$ 4 and 19 per household (per month).
3. Beginning of policy implementation: When should the policy be implemented? Various scenarios include implementation in 2025, 2035, 2045 or 2055.
4. Distance from residential areas: CCS facilities are currently planned in many American states. Some people fear that they could negatively affect buildings and the safety of communities. Different rules regarding the required distance of CCS facilities from residential areas are currently being discussed: 2 miles / 5 miles / 10 miles / 50 miles.
5. Policy endorsement: Various stakeholders (e.g., Greenpeace or the U.S.-based Carbon Capture Coalition (ccc)) and political parties (Democrats(dp), Republicans(rp)) have their own opinions on policy proposals to scale up CCS.
6. Percentage of your friends who endorse the policy scenario: Think about your friends and imagine you could know if they endorse a policy scenario. This attribute represents the percentage of your friends, out of your total number of friends, who endorse it.";

    pub const TASK_INTRO: &str = "You will repeatedly see three different policy scenarios and I will ask you which one you would prefer. If you think you wouldn’t prefer any, feel free to choose the None option.";

    pub const OPTION: &str = "is a {0} policy, costs {1} per household per month, will be implemented in {2}, the required distance to residential areas is {3}, is endorsed by {4}, and {social}% of your friends endorse it.";

    pub const NONE_OPTION: &str = "is to choose no policy.";
}

pub mod app_adoption {
    pub const PERSONA: &str = "You are a {age} years old {gender}, your highest level of school you have completed or the highest degree you have received is {education_level} and your total household income during the past 12 months was {income}.";

    pub const BRIEFING: &str = "Imagine there are several new multiple instant messaging apps on the market. All apps are free and are similar to each other in all but the aspects described below. Furthermore, we ask you to imagine several of your friends are already using such an app. We will show you this information as one of the app attributes.";

    pub const ATTRIBUTES: &str = "The apps differ in terms of the following attributes:
1. Accessibility: Instant messaging apps differ in the way you can access them. They can be:
- Mobile only: A mobile only app is specifically developed for smartphones and tablets. It takes full advantage of mobile device features such as push notifications, camera integration, and location services. It offers a seamless, on-the-go communication experience, but it’s not accessible on desktop or web browsers.
- Web accessible: Web-accessible instant messaging apps expand their reach beyond mobile devices. They allow users to access their chats and conversations via web browsers on desktop computers or laptops. This versatility enables seamless transition between devices, convenient typing with a physical keyboard, and the ability to share files and links more easily on a larger screen.
2. Authentication: Authentication is important to safeguard your personal information and ensure that your conversations remain private. The apps can use one of the three levels of authentication described below, sorted by the least to the most secure:
- Simple authentication: Login with username and password.
- Two-factor authentication: Two-factor authentication (2FA) requires an additional authentication method beyond your username and password. This involves receiving a one-time verification code via SMS or email, which you must enter alongside your password to access your account.
- Multi-factor authentication: In addition to your username, password, and the SMS or email verification code, you must also verify your identity using a fingerprint scanner or a hardware token (a device connected to your mobile or computer.)
3. Customisation level: The customization level determines how much you can personalize your messaging experience. It can take one of the following values:
- Low: You can adjust the basic settings, like security and notification preferences.
- Medium: In addition to the basic settings, you have the flexibility to shape your chat organization, such as creating chat lists and pinning important conversations to the top.
- High: Additionally, you have the option to customize themes and appearance, including elements like color schemes, backgrounds, fonts used and many others.
4. Video calls: To make the most of your video communication experience, apps focus either on One-on-one or multi-person video calls.
- One-on-One: The app provides a straightforward and personal video calling experience designed and optimised for one-on-one interactions. The app does not support video calls between more than two people at once.
- Multi-person: The app offers a versatile video calling feature, allowing you to connect with multiple participants simultaneously.";

    pub const TASK_INTRO: &str = "I will repeatedly show you three apps which differ in terms of the attributes previously described and ask you to select which one (out of the three) you would use instead of the app you are currently using. If you don't like any of the options, please feel free to select the None option.";

    pub const OPTION: &str = "is {0}, has {1} authentication, a {2} customisation level, and allows {3} calls and {social}% of your friends are already using the app.";

    pub const NONE_OPTION: &str = "is to use no app.";
}
